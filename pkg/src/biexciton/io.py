"""CSV/JSON writers shared by the CLI; formats are the package's wire contract.

All floats are written with Python's shortest round-trip repr, so identical
inputs produce byte-identical files.  Every scenario directory carries a
manifest recording the configuration, seed, package version and a sha256 per
output file.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from pathlib import Path

import numpy as np

from . import __version__
from .model import ModelConfig


def write_csv(path, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])
    return path


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return int(x)
    return x


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Header plus float matrix; non-numeric columns come back as NaN."""
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    def to_f(x):
        try:
            return float(x)
        except ValueError:
            return float("nan")
    return header, np.array([[to_f(x) for x in row] for row in rows])


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def sha256_of(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, config: ModelConfig | None, seed: int | None,
                   outputs: list[Path], extra: dict | None = None) -> Path:
    """Run manifest: reruns with identical inputs match except wall_time."""
    out_dir = Path(out_dir)
    payload = {
        "config": None if config is None else config.to_dict(),
        "seed": seed,
        "version": __version__,
        "outputs": {p.name: sha256_of(p) for p in outputs},
        "wall_time": time.time(),
    }
    if extra:
        payload.update(extra)
    return write_json(out_dir / "manifest.json", payload)
