"""Frequency-resolved two-photon correlations via weak sensor qubits.

Two two-level detectors of linewidth Gamma are attached at frequencies
(w1, w2); the normalized steady-state cross moment

    g2 = <s1+ s2+ s2 s1> / (<s1+ s1><s2+ s2>)

is the frequency-resolved second-order correlation of the monitored
channel(s).  Equal frequencies (the map diagonal) also use two sensors,
cross-correlated, which sidesteps the self-correlation artifact a single
detector would produce.  Every grid point is an independent steady-state
solve, so maps parallelize trivially over points and merge by grid index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from . import dressed, solver
from .model import ModelConfig, Sensor, build

DEFAULT_DETECTOR_LINEWIDTH = 10.0


@dataclass
class TwoPhotonMap:
    """g2 values over a (w1, w2) grid, with the detector linewidth used."""

    w1: np.ndarray
    w2: np.ndarray
    values: np.ndarray  # shape (len(w2), len(w1)), row-major in w2
    gamma_detector: float
    channels: tuple[str, str] = ("sigma_H", "sigma_H")


def default_span(chi: float, omega: float, margin: float = 1.1) -> float:
    """Half-width covering every one- and two-photon line with headroom.

    The outermost feature is the line from the lowest dressed state, which
    always bounds the leapfrog lines too.
    """
    lines = dressed.one_photon_lines(chi, omega)
    return margin * abs(lines["III"])


def default_grid(chi: float, omega: float, n: int = 401) -> np.ndarray:
    span = default_span(chi, omega)
    return np.linspace(-span, span, n)


def sensor_pair_config(
    config: ModelConfig,
    w1: float,
    w2: float,
    gamma_detector: float,
    channels: tuple[str, str] = ("sigma_H", "sigma_H"),
    eps_scale: float = 1.0,
) -> ModelConfig:
    """Configuration with two weak sensors appended at (w1, w2)."""
    eps = eps_scale * gamma_detector / 100.0
    sensors = (
        Sensor(w1, gamma_detector, eps, "s1", monitors=channels[0]),
        Sensor(w2, gamma_detector, eps, "s2", monitors=channels[1]),
    )
    return config.with_sensors(config.sensors + sensors)


def g2_point(
    config: ModelConfig,
    w1: float,
    w2: float,
    gamma_detector: float = DEFAULT_DETECTOR_LINEWIDTH,
    channels: tuple[str, str] = ("sigma_H", "sigma_H"),
    eps_scale: float = 1.0,
) -> float:
    """Frequency-resolved g2 at a single (w1, w2) point."""
    cfg = sensor_pair_config(config, w1, w2, gamma_detector, channels, eps_scale)
    mdl = build(cfg)
    liouv = solver.liouvillian(mdl)
    rho = solver.steady_state(liouv)
    z1 = mdl.operators["s1"].matrix
    z2 = mdl.operators["s2"].matrix
    n1 = np.real(solver.expectation(z1.conj().T @ z1, rho))
    n2 = np.real(solver.expectation(z2.conj().T @ z2, rho))
    cross = np.real(
        solver.expectation(z1.conj().T @ z2.conj().T @ z2 @ z1, rho)
    )
    return float(cross / (n1 * n2))


def g2_diagonal(
    config: ModelConfig,
    w_grid: np.ndarray,
    gamma_detector: float = DEFAULT_DETECTOR_LINEWIDTH,
    channels: tuple[str, str] = ("sigma_H", "sigma_H"),
    n_jobs: int = 1,
) -> np.ndarray:
    """Equal-frequency cut g2(w, w) over a detuning grid."""
    vals = Parallel(n_jobs=n_jobs)(
        delayed(g2_point)(config, w, w, gamma_detector, channels) for w in w_grid
    )
    return np.asarray(vals)


def g2_map(
    config: ModelConfig,
    w1_grid: np.ndarray,
    w2_grid: np.ndarray,
    gamma_detector: float = DEFAULT_DETECTOR_LINEWIDTH,
    channels: tuple[str, str] = ("sigma_H", "sigma_H"),
    n_jobs: int = 1,
) -> TwoPhotonMap:
    """Full correlation map; one steady-state solve per grid point."""
    points = [(i, j, w1, w2) for j, w2 in enumerate(w2_grid) for i, w1 in enumerate(w1_grid)]
    vals = Parallel(n_jobs=n_jobs)(
        delayed(g2_point)(config, w1, w2, gamma_detector, channels)
        for _, _, w1, w2 in points
    )
    grid = np.empty((len(w2_grid), len(w1_grid)))
    for (i, j, _, _), v in zip(points, vals):
        grid[j, i] = v
    return TwoPhotonMap(np.asarray(w1_grid), np.asarray(w2_grid), grid,
                        gamma_detector, channels)


def eps_stability(
    config: ModelConfig,
    w1: float,
    w2: float,
    gamma_detector: float = DEFAULT_DETECTOR_LINEWIDTH,
    channels: tuple[str, str] = ("sigma_H", "sigma_H"),
) -> float:
    """Relative change of g2 when the sensor coupling is halved."""
    full = g2_point(config, w1, w2, gamma_detector, channels, eps_scale=1.0)
    half = g2_point(config, w1, w2, gamma_detector, channels, eps_scale=0.5)
    return abs(half - full) / abs(full)


@dataclass
class PolarizationCorrelations:
    """Auto/cross correlations of the two degenerate polarized cavity modes."""

    delta_c: np.ndarray
    n_h: np.ndarray
    n_v: np.ndarray
    g2_hh: np.ndarray
    g2_vv: np.ndarray
    g2_hv: np.ndarray

    @property
    def csi_ratio(self) -> np.ndarray:
        """Cauchy-Schwarz ratio (g2_HV)^2 / (g2_HH g2_VV); > 1 is non-classical."""
        return self.g2_hv**2 / (self.g2_hh * self.g2_vv)


def _polarization_point(config: ModelConfig, delta_c: float, dis=None):
    from dataclasses import replace

    mdl = build(replace(config, delta_c=delta_c))
    liouv = solver.liouvillian(mdl, dissipator_matrix=dis)
    rho = solver.steady_state(liouv)
    ah = mdl.operators["a_H"].matrix
    av = mdl.operators["a_V"].matrix
    nh = np.real(solver.expectation(ah.conj().T @ ah, rho))
    nv = np.real(solver.expectation(av.conj().T @ av, rho))
    m2h = np.real(solver.expectation(ah.conj().T @ ah.conj().T @ ah @ ah, rho))
    m2v = np.real(solver.expectation(av.conj().T @ av.conj().T @ av @ av, rho))
    cross = np.real(
        solver.expectation(ah.conj().T @ av.conj().T @ ah @ av, rho)
    )
    return nh, nv, m2h / nh**2, m2v / nv**2, cross / (nh * nv)


def polarization_correlations(
    config: ModelConfig,
    delta_c_grid: np.ndarray,
    n_jobs: int = 1,
) -> PolarizationCorrelations:
    """Sweep the degenerate mode pair across cavity detunings.

    Requires the circular drive and dual-polarization cavity; by symmetry
    g2_HH and g2_VV coincide, which doubles as a numerical health check.
    """
    if config.drive != "circular" or config.cavity != "dualHV":
        raise ValueError("polarization correlations need drive='circular', cavity='dualHV'")
    # the collapse set is detuning-independent: build its superoperator once
    dis = solver.dissipator(build(config))
    if n_jobs == 1:
        rows = [_polarization_point(config, dc, dis) for dc in delta_c_grid]
    else:
        rows = Parallel(n_jobs=n_jobs)(
            delayed(_polarization_point)(config, dc, dis) for dc in delta_c_grid
        )
    arr = np.asarray(rows)
    return PolarizationCorrelations(
        np.asarray(delta_c_grid), arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], arr[:, 4]
    )
