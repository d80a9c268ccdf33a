"""Assembly of the driven 4-level system, its cavity couplings and dissipators.

Three configurations are supported: the bare driven manifold (no cavity), a
single H-polarized cavity mode, and two degenerate orthogonally polarized
modes under a circular drive.  Weak two-level "sensor" qubits can be appended
to any of them to resolve emission in frequency; their steady-state cross
moments give frequency-resolved photon correlations without back-action.

Everything is written in the rotating frame of the drive; all energies are
detunings from the laser in units of the exciton decay (gamma = 1) and all
times in units of 1/gamma.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import hilbert
from .hilbert import CompositeSpace, Operator, embed

SENSOR_COUPLING_BOUND = 100.0  # enforce eps <= linewidth / 100

#: Operators a sensor may monitor, resolved against a built model.
MONITOR_NAMES = ("sigma_H", "sigma_V", "a", "a_H", "a_V")


@dataclass(frozen=True)
class Sensor:
    """A weakly coupled two-level detector.

    detuning: sensor frequency relative to the laser; linewidth: inverse
    response time (sets the frequency window); coupling: dipole coupling to
    the monitored operator, bounded well below the linewidth so the sensor
    populations stay perturbative (scale as coupling^2).
    """

    detuning: float
    linewidth: float
    coupling: float
    label: str
    monitors: str = "sigma_H"

    def __post_init__(self):
        if self.linewidth <= 0:
            raise ValueError("sensor linewidth must be positive")
        if self.coupling <= 0:
            raise ValueError("sensor coupling must be positive")
        if self.coupling > self.linewidth / SENSOR_COUPLING_BOUND:
            raise ValueError(
                f"sensor coupling {self.coupling} violates the weak-coupling bound "
                f"linewidth/{SENSOR_COUPLING_BOUND:.0f} = {self.linewidth / SENSOR_COUPLING_BOUND}"
            )
        if self.monitors not in MONITOR_NAMES:
            raise ValueError(f"monitored operator must be one of {MONITOR_NAMES}")

    def to_dict(self) -> dict:
        return {
            "detuning": self.detuning,
            "linewidth": self.linewidth,
            "coupling": self.coupling,
            "label": self.label,
            "monitors": self.monitors,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Sensor":
        return cls(**d)


@dataclass(frozen=True)
class ModelConfig:
    """Physical parameters, all in units of gamma (= 1 by convention).

    delta_x defaults to chi/2 (drive at half the two-exciton energy) when
    left as None.  n_max is the boson truncation per cavity mode; defaults
    are 4 for the single mode and 3 per mode for the dual-polarization pair,
    where populations stay far below one photon.
    """

    chi: float
    omega: float
    kappa: float = 0.0
    g: float = 0.0
    gamma: float = 1.0
    delta_x: float | None = None
    delta_c: float = 0.0
    drive: str = "linearV"
    cavity: str = "none"
    n_max: int | None = None
    sensors: tuple[Sensor, ...] = field(default_factory=tuple)
    dim_cap: int = hilbert.DEFAULT_DIM_CAP

    def __post_init__(self):
        if self.gamma != 1.0:
            raise ValueError("gamma sets the unit system and must equal 1")
        if self.chi <= 0:
            raise ValueError("biexciton binding energy chi must be positive")
        for name in ("omega", "kappa", "g"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.drive not in ("linearV", "circular"):
            raise ValueError(f"unknown drive {self.drive!r}")
        if self.cavity not in ("none", "singleH", "dualHV"):
            raise ValueError(f"unknown cavity layout {self.cavity!r}")
        object.__setattr__(self, "sensors", tuple(self.sensors))

    @property
    def delta_x_resolved(self) -> float:
        return self.chi / 2.0 if self.delta_x is None else self.delta_x

    @property
    def n_max_resolved(self) -> int:
        if self.n_max is not None:
            return self.n_max
        return 3 if self.cavity == "dualHV" else 4

    def with_sensors(self, sensors) -> "ModelConfig":
        return replace(self, sensors=tuple(sensors))

    def to_dict(self) -> dict:
        return {
            "chi": self.chi,
            "omega": self.omega,
            "kappa": self.kappa,
            "g": self.g,
            "delta_x": self.delta_x,
            "delta_c": self.delta_c,
            "drive": self.drive,
            "cavity": self.cavity,
            "n_max": self.n_max,
            "sensors": [s.to_dict() for s in self.sensors],
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        d["sensors"] = tuple(Sensor.from_dict(s) for s in d.get("sensors", []))
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ModelConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class LindbladModel:
    """Rotating-frame Hamiltonian plus (operator, rate, channel label) triples."""

    space: CompositeSpace
    hamiltonian: Operator
    collapse_ops: list[tuple[Operator, float, str]]
    config: ModelConfig
    operators: dict[str, Operator] = field(default_factory=dict)

    def __post_init__(self):
        dev = np.max(np.abs(self.hamiltonian.matrix - self.hamiltonian.matrix.conj().T))
        if dev > hilbert.HERMITIAN_TOL * max(1.0, np.max(np.abs(self.hamiltonian.matrix))):
            raise ValueError(f"Hamiltonian deviates from Hermitian by {dev:.3e}")
        for _, rate, label in self.collapse_ops:
            if rate <= 0:
                raise ValueError(f"collapse rate for channel {label!r} must be positive")

    @property
    def dim(self) -> int:
        return self.space.dim

    def channel(self, label: str) -> tuple[Operator, float]:
        for op, rate, lab in self.collapse_ops:
            if lab == label:
                return op, rate
        raise KeyError(f"no collapse channel {label!r}")

    @property
    def channel_labels(self) -> list[str]:
        return [lab for _, _, lab in self.collapse_ops]


def _exciton_operators(space: CompositeSpace) -> dict[str, Operator]:
    ops = {}
    for pol in ("H", "V"):
        ops[f"sigma_{pol}"] = embed(hilbert.lowering_biexciton(pol), space, 0)
    return ops


def build(config: ModelConfig) -> LindbladModel:
    """Assemble the Lindblad model for a configuration.

    The Hamiltonian is
        dX (sH+ sH + sV+ sV) - chi sH+ sH sV+ sV + drive + cavity terms
    with the drive W (sV+ + sV) for a linear V polarization or
    W (sc+ + sc), sc = (sH + i sV)/sqrt(2), for a circular one.  Radiative
    decay enters as four rate-gamma channels |X><B| and |G><X| for X = H, V
    (the two cascade arms decay independently, no cross interference) plus
    rate-kappa photon loss per cavity mode.
    """
    factors = [hilbert.biexciton_factor()]
    n_modes = {"none": 0, "singleH": 1, "dualHV": 2}[config.cavity]
    factors += [hilbert.boson_factor(config.n_max_resolved)] * n_modes
    space = CompositeSpace(tuple(factors), dim_cap=config.dim_cap)

    ops = _exciton_operators(space)
    sh, sv = ops["sigma_H"], ops["sigma_V"]
    delta_x = config.delta_x_resolved

    h = delta_x * (sh.dag() @ sh + sv.dag() @ sv) - config.chi * (
        sh.dag() @ sh @ sv.dag() @ sv
    )

    if config.drive == "linearV":
        drive_op = sv
    else:
        drive_op = (1.0 / np.sqrt(2.0)) * (sh + 1j * sv)
    h = h + config.omega * (drive_op.dag() + drive_op)

    collapse: list[tuple[Operator, float, str]] = []
    mode_names = {"singleH": ["a"], "dualHV": ["a_H", "a_V"]}.get(config.cavity, [])
    for k, name in enumerate(mode_names):
        a = hilbert.boson_annihilator(space, 1 + k)
        ops[name] = a
        sigma = sh if name in ("a", "a_H") else sv
        h = h + config.delta_c * (a.dag() @ a) + config.g * (a.dag() @ sigma + a @ sigma.dag())
        if config.kappa > 0:
            collapse.append((a, config.kappa, name))

    gamma = config.gamma
    for x, xi in (("H", hilbert.H), ("V", hilbert.V)):
        down_b = np.zeros((4, 4), dtype=complex)
        down_b[xi, hilbert.B] = 1.0
        down_g = np.zeros((4, 4), dtype=complex)
        down_g[hilbert.G, xi] = 1.0
        bare = CompositeSpace((hilbert.biexciton_factor(),))
        collapse.append((embed(Operator(bare, down_b), space, 0), gamma, f"B->{x}"))
        collapse.append((embed(Operator(bare, down_g), space, 0), gamma, f"{x}->G"))

    model = LindbladModel(space, h, collapse, config, ops)
    if config.sensors:
        model = attach_sensors(model, config.sensors)
    return model


def attach_sensors(model: LindbladModel, sensors) -> LindbladModel:
    """Append one qubit factor per sensor and wire it to its monitored operator.

    Each sensor adds  d s+ s  +  eps (s+ O + s O+)  to the Hamiltonian and a
    rate-linewidth decay channel, where O is the monitored emission operator.
    Sensor populations scale as eps^2, so they read out the field without
    perturbing it.
    """
    sensors = tuple(sensors)
    for s in sensors:
        if s.monitors not in model.operators:
            raise ValueError(
                f"sensor {s.label!r} monitors {s.monitors!r} which is absent from this model"
            )
    space = model.space.extended(*(hilbert.qubit_factor() for _ in sensors))
    n_old = len(model.space.factors)

    def lift(op: Operator) -> Operator:
        mats = np.kron(op.matrix, np.eye(space.dim // model.space.dim, dtype=complex))
        return Operator(space, mats)

    h = lift(model.hamiltonian)
    collapse = [(lift(op), rate, lab) for op, rate, lab in model.collapse_ops]
    ops = {name: lift(op) for name, op in model.operators.items()}

    for k, s in enumerate(sensors):
        zeta = embed(hilbert.qubit_lowering(), space, n_old + k)
        mon = ops[s.monitors]
        h = h + s.detuning * (zeta.dag() @ zeta) + s.coupling * (
            zeta.dag() @ mon + zeta @ mon.dag()
        )
        collapse.append((zeta, s.linewidth, s.label))
        ops[s.label] = zeta

    config = model.config.with_sensors(model.config.sensors + sensors)
    return LindbladModel(space, h, collapse, config, ops)


def default_sensor(detuning: float, label: str, linewidth: float = 10.0,
                   monitors: str = "sigma_H") -> Sensor:
    """Sensor with the coupling at the weak-coupling bound linewidth/100."""
    return Sensor(
        detuning=detuning,
        linewidth=linewidth,
        coupling=linewidth / SENSOR_COUPLING_BOUND,
        label=label,
        monitors=monitors,
    )
