"""Input handling: schema-checked CSV/JSON readers and the figure spec."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class SchemaError(RuntimeError):
    """An input file is missing, empty, or lacks a required column."""


@dataclass
class FigureSpec:
    """What to render: scenario name, input directory, output path.

    Axis ranges/scales and the color convention are fixed per figure by the
    renderers; overrides land in `options` (e.g. {'dpi': 200}).
    """

    name: str
    input_dir: Path
    output: Path
    options: dict = field(default_factory=dict)


def read_table(path, required: list[str]) -> dict[str, np.ndarray]:
    """Load a CSV as named float columns, validating presence and content."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: input file missing")
    with open(path) as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: file is empty") from None
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    for col in required:
        if col not in header:
            raise SchemaError(f"{path}: missing column {col!r} (has {header})")
    data = {}
    for col in required:
        i = header.index(col)
        try:
            data[col] = np.array([float(r[i]) for r in rows])
        except ValueError:
            data[col] = np.array([r[i] for r in rows])
    return data


def read_lines_table(path) -> dict[str, list[tuple[str, float]]]:
    """The analytic line table, keyed by kind."""
    cols = read_table(path, ["label", "detuning_gamma", "kind"])
    out: dict[str, list[tuple[str, float]]] = {"one_photon": [], "two_photon": []}
    for label, det, kind in zip(cols["label"], cols["detuning_gamma"], cols["kind"]):
        out[str(kind)].append((str(label), float(det)))
    return out


def read_json(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: input file missing")
    with open(path) as fh:
        payload = json.load(fh)
    if not payload:
        raise SchemaError(f"{path}: empty JSON payload")
    return payload
