"""Two-photon polarization tomography from cavity field correlators.

The (unnormalized) pair state accumulated over a measurement window tau is

    theta[AB, CD](tau) = integral_0^tau <a_A+(0) a_B+(t) a_D(t) a_C(0)> dt

in the basis (HH, HV, VH, VV).  Each correlator is a sum of complex
exponentials in the Liouvillian eigenbasis (quantum regression theorem), so
the time integral is evaluated in closed form mode by mode.  Metrics follow:
concurrence via the Wootters spin flip, fidelity to the symmetric Bell state
(|HV> + |VH>)/sqrt(2), purity and linear entropy.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .solver import Superoperator, vec

logger = logging.getLogger(__name__)

_POLS = ("H", "V")

#: Wootters spin-flip matrix in the (HH, HV, VH, VV) basis: the antidiagonal
#: with entries (-1, 1, 1, -1), i.e. sigma_y x sigma_y.
SPIN_FLIP = np.array(
    [
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
    ],
    dtype=complex,
)

BELL_STATE = np.array([0.0, 1.0, 1.0, 0.0], dtype=complex) / np.sqrt(2.0)


@dataclass
class PairDensityMatrix:
    """4x4 polarization pair state at measurement window tau."""

    matrix: np.ndarray
    tau: float
    normalized: bool

    def __post_init__(self):
        if self.matrix.shape != (4, 4):
            raise ValueError("pair state must be 4x4")
        dev = np.max(np.abs(self.matrix - self.matrix.conj().T))
        scale = max(np.max(np.abs(self.matrix)), 1e-300)
        if dev > 1e-10 * scale:
            raise ValueError(f"pair state deviates from Hermitian by {dev:.3e}")
        if self.normalized and abs(np.trace(self.matrix) - 1.0) > 1e-10:
            raise ValueError("normalized pair state must have unit trace")

    def normalize(self) -> "PairDensityMatrix":
        tr = np.trace(self.matrix).real
        if tr <= 0:
            raise ValueError("pair state has non-positive trace")
        return PairDensityMatrix(self.matrix / tr, self.tau, True)


class ThetaBuilder:
    """Shares the heavy Liouvillian eigendecomposition across tau points."""

    def __init__(self, liouv: Superoperator, rho_ss: np.ndarray):
        mdl = liouv.model
        if "a_H" not in mdl.operators or "a_V" not in mdl.operators:
            raise ValueError("pair tomography needs the dual-polarization cavity")
        lam, rvecs, lu = liouv.eigensystem()
        self.lam = lam
        modes = {p: mdl.operators[f"a_{p}"].matrix for p in _POLS}
        # b[(A, C)]: initial condition a_C rho a_A+ expanded in eigenmodes
        self.b = {
            (a, c): sla.lu_solve(lu, vec(modes[c] @ rho_ss @ modes[a].conj().T))
            for a in _POLS for c in _POLS
        }
        # w[(B, D)]: readout functional Tr[a_B+ a_D  . ] over eigenmodes
        self.w = {
            (bb, d): vec((modes[bb].conj().T @ modes[d]).conj().T).conj() @ rvecs
            for bb in _POLS for d in _POLS
        }
        self._zero = np.abs(lam) < 1e-12 * max(1.0, float(np.max(np.abs(lam))))

    def _mode_integrals(self, tau: float) -> np.ndarray:
        """integral_0^tau exp(lam t) dt, handling the stationary mode exactly."""
        out = np.empty_like(self.lam)
        nz = ~self._zero
        out[nz] = np.expm1(self.lam[nz] * tau) / self.lam[nz]
        out[self._zero] = tau
        return out

    def theta(self, tau: float, herm_tol: float = 1e-8) -> PairDensityMatrix:
        if tau <= 0:
            raise ValueError("measurement window tau must be positive")
        f = self._mode_integrals(tau)
        th = np.empty((4, 4), dtype=complex)
        for i, (a, bb) in enumerate((x, y) for x in _POLS for y in _POLS):
            for j, (c, d) in enumerate((x, y) for x in _POLS for y in _POLS):
                th[i, j] = np.sum(self.w[(bb, d)] * self.b[(a, c)] * f)
        dev = float(np.max(np.abs(th - th.conj().T)))
        scale = float(np.max(np.abs(th)))
        if dev > herm_tol * scale:
            raise RuntimeError(f"theta integration failed hermiticity ({dev:.2e})")
        if dev > 1e-12 * scale:
            logger.debug("symmetrized theta(tau=%g): hermiticity deviation %.2e", tau, dev)
        th = (th + th.conj().T) / 2.0
        return PairDensityMatrix(th, tau, False)


def theta_matrix(liouv: Superoperator, rho_ss: np.ndarray, tau: float) -> PairDensityMatrix:
    """One-shot accumulated pair state; use ThetaBuilder for many tau values."""
    return ThetaBuilder(liouv, rho_ss).theta(tau)


def _clipped(rho: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Clip small negative eigenvalues for metric evaluation; never stored."""
    w, v = np.linalg.eigh(rho)
    if w.min() < -tol:
        raise ValueError(f"pair state has negative eigenvalue {w.min():.3e} beyond tolerance")
    if w.min() < 0:
        logger.debug("clipping negative pair-state eigenvalue %.2e", w.min())
    w = np.clip(w, 0.0, None)
    out = (v * w) @ v.conj().T
    return out / np.trace(out).real


def concurrence(state: PairDensityMatrix) -> float:
    """Wootters concurrence of the normalized pair state.

    C = max(0, sqrt(l1) - sqrt(l2) - sqrt(l3) - sqrt(l4)) with l_i the
    decreasing eigenvalues of rho (sy x sy) rho* (sy x sy).
    """
    if not state.normalized:
        raise ValueError("concurrence takes the normalized state")
    rho = _clipped(state.matrix)
    rho_tilde = SPIN_FLIP @ rho.conj() @ SPIN_FLIP
    lam = np.linalg.eigvals(rho @ rho_tilde)
    lam = np.sort(np.clip(lam.real, 0.0, None))[::-1]
    roots = np.sqrt(lam)
    return float(max(0.0, roots[0] - roots[1] - roots[2] - roots[3]))


def state_metrics(state: PairDensityMatrix) -> tuple[float, float, float]:
    """(fidelity to (|HV>+|VH>)/sqrt(2), purity Tr rho^2, linear entropy).

    Fidelity uses the amplitude convention F = sqrt(<psi|rho|psi>), which for
    a pure target state equals the Uhlmann fidelity; F = 1 iff rho is the
    Bell state, and the maximally mixed state gives F = 1/2.
    """
    if not state.normalized:
        raise ValueError("metrics take the normalized state")
    rho = _clipped(state.matrix)
    overlap = float(np.real(BELL_STATE.conj() @ rho @ BELL_STATE))
    fidelity = float(np.sqrt(max(overlap, 0.0)))
    purity = float(np.real(np.trace(rho @ rho)))
    return fidelity, purity, (4.0 / 3.0) * (1.0 - purity)


@dataclass
class TomographyCurve:
    """Entanglement metrics versus measurement window."""

    tau: np.ndarray
    concurrence: np.ndarray
    fidelity: np.ndarray
    purity: np.ndarray
    linear_entropy: np.ndarray


def metrics_vs_tau(liouv: Superoperator, rho_ss: np.ndarray, taus) -> TomographyCurve:
    builder = ThetaBuilder(liouv, rho_ss)
    rows = []
    for tau in taus:
        th = builder.theta(float(tau)).normalize()
        c = concurrence(th)
        f, p, sl = state_metrics(th)
        rows.append((c, f, p, sl))
    arr = np.asarray(rows)
    return TomographyCurve(np.asarray(taus, dtype=float),
                           arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3])
