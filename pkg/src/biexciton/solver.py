"""Dense Liouvillian machinery: steady states, correlators, spectra, moments.

Density matrices are vectorized column-major, so vec(A rho B) =
(B^T kron A) vec(rho).  The Liouvillian

    L(rho) = -i [H, rho] + sum_k r_k/2 (2 O rho O+ - O+O rho - rho O+O)

is built once as a dim^2 x dim^2 dense matrix.  Steady states come from a
trace-constrained linear solve with iterative refinement; two-time
correlators and spectra come from the Liouvillian eigendecomposition via the
quantum regression theorem (sums of complex exponentials / Lorentzians),
with a propagator-based transform kept as an independent cross-check.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla

from .model import LindbladModel


def vec(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(v.size)))
    return v.reshape((d, d), order="F")


@dataclass
class Superoperator:
    """Vectorized Liouvillian with a handle back to the model that built it."""

    matrix: np.ndarray
    model: LindbladModel

    @property
    def dim(self) -> int:
        return self.model.dim

    _eig: tuple | None = field(default=None, repr=False)

    def eigensystem(self):
        """Cached (eigenvalues, right vectors, LU of right vectors)."""
        if self._eig is None:
            lam, rvecs = sla.eig(self.matrix)
            lu = sla.lu_factor(rvecs)
            self._eig = (lam, rvecs, lu)
        return self._eig


class DegenerateSteadyStateError(RuntimeError):
    """The Liouvillian kernel is not one-dimensional at working precision."""


def dissipator(model: LindbladModel) -> np.ndarray:
    """Collapse part of the Liouvillian; reusable across Hamiltonian changes."""
    d = model.dim
    ident = np.eye(d, dtype=complex)
    mat = np.zeros((d * d, d * d), dtype=complex)
    for op, rate, _ in model.collapse_ops:
        o = op.matrix
        odo = o.conj().T @ o
        mat += (rate / 2.0) * (
            2.0 * np.kron(o.conj(), o) - np.kron(ident, odo) - np.kron(odo.T, ident)
        )
    return mat


def liouvillian(model: LindbladModel, dissipator_matrix: np.ndarray | None = None) -> Superoperator:
    """Full vectorized generator; pass a cached dissipator when sweeping
    Hamiltonian parameters over a fixed collapse set."""
    d = model.dim
    ident = np.eye(d, dtype=complex)
    h = model.hamiltonian.matrix
    mat = -1j * (np.kron(ident, h) - np.kron(h.T, ident))
    mat += dissipator(model) if dissipator_matrix is None else dissipator_matrix
    return Superoperator(mat, model)


def steady_state(
    liouv: Superoperator,
    tol: float = 1e-10,
    refine_steps: int = 2,
    check_unique: bool = False,
) -> np.ndarray:
    """Solve L(rho) = 0 with Tr rho = 1.

    The trace functional is folded into the first row of the system (the
    kernel makes one row redundant); a couple of iterative-refinement passes
    push the forward error down to the scale of the tiny sensor moments the
    correlation maps read out.  Falls back to long-time propagation when the
    direct solve does not meet `tol`.
    """
    L = liouv.matrix
    d = liouv.dim
    n = d * d
    trace_idx = np.arange(0, n, d + 1)

    scale = max(1.0, float(np.mean(np.abs(np.diagonal(L)))))
    A = L.copy()
    A[0, trace_idx] += scale
    b = np.zeros(n, dtype=complex)
    b[0] = scale

    with np.errstate(all="ignore"):
        lu = sla.lu_factor(A)
        x = sla.lu_solve(lu, b)
        for _ in range(refine_steps):
            if not np.all(np.isfinite(x)):
                break
            r = b - A @ x
            x += sla.lu_solve(lu, r)

    def _kernel_dimension() -> int:
        lam = sla.eigvals(L)
        return int(np.sum(np.abs(lam) < 1e-8 * max(1.0, np.max(np.abs(lam)))))

    if not np.all(np.isfinite(x)):
        # singular constrained system: either a degenerate kernel or severe
        # ill-conditioning; tell them apart before giving up
        if _kernel_dimension() != 1:
            raise DegenerateSteadyStateError(
                "Liouvillian kernel is not one-dimensional; steady state not unique"
            )
        rho = propagate_to_steady(liouv, tol=tol)
    else:
        rho = unvec(x)
        rho = (rho + rho.conj().T) / 2.0
        rho /= np.trace(rho).real
        residual = np.linalg.norm(L @ vec(rho))
        if residual > tol * max(1.0, np.linalg.norm(L, ord=np.inf)):
            if _kernel_dimension() != 1:
                raise DegenerateSteadyStateError(
                    "Liouvillian kernel is not one-dimensional; steady state not unique"
                )
            rho = propagate_to_steady(liouv, rho0=rho, tol=tol)

    if check_unique and _kernel_dimension() != 1:
        raise DegenerateSteadyStateError(
            "Liouvillian kernel is not one-dimensional; steady state not unique"
        )

    _check_state(rho)
    return rho


def _check_state(rho: np.ndarray, trace_tol: float = 1e-10, herm_tol: float = 1e-10,
                 eig_tol: float = 1e-8):
    if abs(np.trace(rho) - 1.0) > trace_tol:
        raise RuntimeError(f"steady state trace deviates by {abs(np.trace(rho)) - 1.0:.3e}")
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise RuntimeError("steady state is not Hermitian at tolerance")
    w = np.linalg.eigvalsh(rho)
    if w.min() < -eig_tol:
        raise RuntimeError(f"steady state has negative eigenvalue {w.min():.3e}")


def propagate_to_steady(
    liouv: Superoperator,
    rho0: np.ndarray | None = None,
    t_step: float | None = None,
    tol: float = 1e-10,
    max_doublings: int = 60,
) -> np.ndarray:
    """March exp(L t) rho0 with repeated squaring until the state stops moving."""
    d = liouv.dim
    if rho0 is None:
        rho0 = np.eye(d, dtype=complex) / d
    rates = [r for _, r, _ in liouv.model.collapse_ops]
    if t_step is None:
        t_step = 1.0 / min(rates) if rates else 1.0
    prop = sla.expm(liouv.matrix * t_step)
    v = vec(rho0)
    for _ in range(max_doublings):
        v_new = prop @ v
        if np.linalg.norm(v_new - v) < tol * np.linalg.norm(v_new):
            v = v_new
            break
        v = v_new
        prop = prop @ prop
    rho = unvec(v)
    rho = (rho + rho.conj().T) / 2.0
    return rho / np.trace(rho).real


def expectation(op: np.ndarray, rho: np.ndarray) -> complex:
    return complex(np.trace(op @ rho))


def _regression_modes(liouv, rho: np.ndarray, a_mat: np.ndarray, b_mat: np.ndarray):
    """Coefficients c_k, rates lam_k with <A(0)B(tau)> = sum_k c_k exp(lam_k tau)."""
    lam, rvecs, lu = liouv.eigensystem()
    coeff = sla.lu_solve(lu, vec(rho @ a_mat))
    weights = vec(b_mat.conj().T).conj() @ rvecs
    return weights * coeff, lam


def two_time_correlator(
    liouv: Superoperator,
    rho_ss: np.ndarray,
    a_mat: np.ndarray,
    b_mat: np.ndarray,
    tau_grid: np.ndarray,
) -> np.ndarray:
    """<A(0) B(tau)> on an ascending tau grid via the regression theorem."""
    tau_grid = np.asarray(tau_grid, dtype=float)
    if np.any(np.diff(tau_grid) < 0):
        raise ValueError("tau grid must be ascending")
    c, lam = _regression_modes(liouv, rho_ss, a_mat, b_mat)
    return np.einsum("k,tk->t", c, np.exp(np.outer(tau_grid, lam)))


@dataclass
class SpectrumResult:
    """Incoherent emission spectrum on a detuning grid.

    `coherent_weight` is pi |<O>|^2, the area of the elastic line at the
    laser frequency, reported separately because a delta peak has no place
    on a finite grid.  The tabulated values integrate (over the full line
    shape) to pi (<O+O> - |<O>|^2).
    """

    detuning: np.ndarray
    values: np.ndarray
    channel: str
    coherent_weight: float = 0.0


def emission_spectrum(
    liouv: Superoperator,
    rho_ss: np.ndarray,
    op: np.ndarray,
    omega_grid: np.ndarray,
    channel: str = "",
    zero_rate_tol: float = 1e-9,
) -> SpectrumResult:
    """Re integral_0^inf <O+(0) O(tau)> e^{i w tau} d tau as a Lorentzian sum.

    Modes with vanishing decay rate carry the elastic (coherent) scattering;
    they are split off into `coherent_weight` instead of being evaluated on
    the grid.  Warns when the grid is too coarse to resolve unit-linewidth
    peaks.
    """
    omega_grid = np.asarray(omega_grid, dtype=float)
    step = np.max(np.diff(omega_grid)) if omega_grid.size > 1 else 0.0
    if step > 0.5:
        warnings.warn(
            f"spectrum grid step {step:.3g} exceeds gamma/2; unit-width peaks "
            "may be missed", stacklevel=2
        )
    c, lam = _regression_modes(liouv, rho_ss, op.conj().T, op)
    rate_scale = max(1.0, float(np.max(np.abs(lam.real))))
    live = np.abs(lam.real) > zero_rate_tol * rate_scale
    denom = lam[live][None, :] + 1j * omega_grid[:, None]
    vals = np.real(-(c[live][None, :] / denom).sum(axis=1))
    coherent = np.pi * float(np.real(np.sum(c[~live])))
    return SpectrumResult(omega_grid, vals, channel, coherent_weight=coherent)


def spectrum_by_transform(
    liouv: Superoperator,
    rho_ss: np.ndarray,
    op: np.ndarray,
    omega_grid: np.ndarray,
    t_max: float,
    dt: float,
) -> np.ndarray:
    """Cross-check path: propagate the correlator and integrate the transform.

    Uses a fixed-step propagator (matrix exponential applied repeatedly) and
    Simpson weights; independent of the eigendecomposition route up to the
    shared Liouvillian.  Subtracts the stationary plateau so it matches the
    incoherent spectrum of `emission_spectrum`.
    """
    n_steps = int(round(t_max / dt))
    if n_steps % 2 == 1:
        n_steps += 1
    prop = sla.expm(liouv.matrix * dt)
    v = vec(rho_ss @ op.conj().T)
    w_left = vec(op.conj().T).conj()
    corr = np.empty(n_steps + 1, dtype=complex)
    for i in range(n_steps + 1):
        corr[i] = w_left @ v
        if i < n_steps:
            v = prop @ v
    plateau = expectation(op.conj().T, rho_ss) * expectation(op, rho_ss)
    corr = corr - plateau
    taus = np.arange(n_steps + 1) * dt
    weights = np.ones(n_steps + 1)
    weights[1:-1:2], weights[2:-1:2] = 4.0, 2.0
    weights *= dt / 3.0
    phases = np.exp(1j * np.outer(np.asarray(omega_grid), taus))
    return np.real(phases @ (weights * corr))


def cavity_observables(
    liouv_or_model,
    rho_ss: np.ndarray,
    mode: str = "a",
    pairs: bool = True,
) -> tuple[float, float, float]:
    """Population, photon and photon-pair coincidence ratios of a cavity mode.

    Returns (n, g2, g2_pairs) with n = <a+a>, g2 = <a+a+aa>/n^2 and
    g2_pairs = <a+^4 a^4>/<a+a+aa>^2, the two-photon analogue treating pairs
    as the emission unit.  Ratios are NaN when their denominators vanish
    (vacuum guard).  The pair moment needs at least 4 boson levels; pass
    pairs=False to skip it on tighter truncations (returned as NaN).
    """
    model = getattr(liouv_or_model, "model", liouv_or_model)
    if mode not in model.operators:
        raise ValueError(f"model has no cavity mode {mode!r}")
    a = model.operators[mode].matrix
    boson_slots = [f.dim for f in model.space.factors if f.kind == "boson"]
    n_levels = boson_slots[0 if mode in ("a", "a_H") else 1]
    if pairs and n_levels < 5:
        raise ValueError(
            f"boson truncation {n_levels - 1} too small for the fourth moment; need n_max >= 4"
        )
    ad = a.conj().T
    n = float(np.real(expectation(ad @ a, rho_ss)))
    m2 = float(np.real(expectation(ad @ ad @ a @ a, rho_ss)))
    g2 = m2 / n**2 if n > 0 else float("nan")
    if pairs:
        m4 = float(np.real(expectation(ad @ ad @ ad @ ad @ a @ a @ a @ a, rho_ss)))
        g2_pairs = m4 / m2**2 if m2 > 0 else float("nan")
    else:
        g2_pairs = float("nan")
    return n, g2, g2_pairs


def find_peaks_grid(x: np.ndarray, y: np.ndarray, min_rel_height: float = 1e-3) -> np.ndarray:
    """Positions of interior local maxima above a relative height floor."""
    y = np.asarray(y)
    idx = np.where((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]))[0] + 1
    floor = min_rel_height * y.max()
    return np.asarray(x)[idx[y[idx] > floor]]
