"""Quantum-jump unraveling of the master equation into click records.

Between jumps the state evolves under the non-Hermitian effective
Hamiltonian H - (i/2) sum_k r_k O_k+ O_k, applied exactly through its
eigendecomposition, so there is no time-step error and near-coincident
jumps of bunched pair emission are resolved exactly.  The squared norm is
the survival probability; each jump time is located on it by monotone
multi-point bisection to 1e-10 relative.  Jump channels are drawn with
probability proportional to rate * |O_k psi|^2 and the state reset to the
normalized O_k psi.

Trajectories use independent counter-based RNG streams keyed by
(seed, trajectory index), so results are bit-reproducible and independent
of execution order; parallel runs merge deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from scipy import linalg as sla

from .model import LindbladModel

BISECT_REL_TOL = 1e-10
_FANOUT = 32  # points per bisection pass; keeps the numpy call count low


@dataclass
class TrajectoryConfig:
    """One Monte Carlo run: which model, how long, how many, which channels."""

    model: LindbladModel
    total_time: float
    n_trajectories: int = 1
    seed: int = 0
    recorded: tuple[str, ...] | None = None  # None records every channel
    warmup: float | None = None  # default 50 / (slowest of kappa, gamma)
    initial: np.ndarray | None = None  # default ground state x vacuum
    sample_every: float | None = None  # also accumulate basis populations

    def __post_init__(self):
        if self.total_time <= 0:
            raise ValueError("total_time must be positive")
        if self.n_trajectories < 1:
            raise ValueError("need at least one trajectory")

    @property
    def warmup_resolved(self) -> float:
        if self.warmup is not None:
            return self.warmup
        kappa = self.model.config.kappa
        base = kappa if kappa > 0 else self.model.config.gamma
        return 50.0 / base


@dataclass
class ClickRecord:
    """Emission events of one trajectory: parallel arrays of time and channel code.

    `populations` holds the time-averaged bare-basis occupations when the run
    sampled them (sample_every set), else None.
    """

    times: np.ndarray
    channels: np.ndarray
    labels: tuple[str, ...]
    duration: float
    populations: np.ndarray | None = None

    def __post_init__(self):
        if self.times.size and np.any(np.diff(self.times) <= 0):
            raise ValueError("click times must be strictly increasing")

    def for_channel(self, label: str) -> np.ndarray:
        code = self.labels.index(label)
        return self.times[self.channels == code]

    def __iter__(self):
        for t, c in zip(self.times, self.channels):
            yield float(t), self.labels[int(c)]


@dataclass
class CountingDistribution:
    """Histogram of photon counts over consecutive windows of length T."""

    window: float
    p: np.ndarray
    n_windows: int

    def __post_init__(self):
        if self.n_windows > 0 and abs(self.p.sum() - 1.0) > 1e-12:
            raise ValueError("counting distribution must be normalized")
        if np.any(self.p < 0):
            raise ValueError("probabilities must be non-negative")

    @property
    def mean(self) -> float:
        return float(np.arange(self.p.size) @ self.p)

    def factorial_moment(self, k: int) -> float:
        """<n (n-1) ... (n-k+1)>, the k-th factorial moment."""
        n = np.arange(self.p.size, dtype=float)
        w = np.ones_like(n)
        for j in range(k):
            w *= n - j
        return float(w @ self.p)


class _JumpEngine:
    """Precomputed eigenbasis machinery for one model, shared by trajectories.

    States live as coefficient vectors phi in the eigenbasis of the effective
    Hamiltonian, where free evolution is a pointwise complex exponential; the
    physical vector is psi = S phi.  All hot-loop operations reduce to small
    BLAS matmuls against precomputed matrices.
    """

    def __init__(self, model: LindbladModel):
        h_eff = model.hamiltonian.matrix.astype(complex).copy()
        for op, rate, _ in model.collapse_ops:
            h_eff -= 0.5j * rate * (op.matrix.conj().T @ op.matrix)
        lam, s = sla.eig(h_eff)
        cond = np.linalg.cond(s)
        if not np.isfinite(cond) or cond > 1e12:
            raise RuntimeError(
                f"effective Hamiltonian eigenbasis ill-conditioned (cond {cond:.2e})"
            )
        self.freq = -1j * lam  # phi(t) = exp(freq * t) * phi(0)
        self.s = s
        self.s_t = np.ascontiguousarray(s.T)
        self.s_inv = np.linalg.inv(s)
        self.labels = tuple(lab for _, _, lab in model.collapse_ops)
        # channel k applied to phi: phi' = K[k] phi, with sqrt(rate) folded in
        self.jump_from_phi = np.stack(
            [np.sqrt(rate) * (self.s_inv @ op.matrix @ s)
             for op, rate, _ in model.collapse_ops]
        )
        self.dim = h_eff.shape[0]
        self._fractions = np.linspace(0.0, 1.0, _FANOUT)

    def norm_sq(self, phi: np.ndarray, ts: np.ndarray) -> np.ndarray:
        psi = (np.exp(np.multiply.outer(ts, self.freq)) * phi) @ self.s_t
        return (psi.real**2 + psi.imag**2).sum(axis=1)

    def norm_sq_one(self, phi: np.ndarray) -> float:
        psi = phi @ self.s_t
        return float((psi.real**2 + psi.imag**2).sum())

    def advance(self, phi: np.ndarray, t: float) -> np.ndarray:
        return np.exp(self.freq * t) * phi

    def to_phi(self, psi: np.ndarray) -> np.ndarray:
        return self.s_inv @ psi

    def jump(self, phi: np.ndarray, rng) -> tuple[np.ndarray, int]:
        """Pick a channel with probability prop. to its instantaneous flux."""
        cand = self.jump_from_phi @ phi
        psi = cand @ self.s_t
        weights = (psi.real**2 + psi.imag**2).sum(axis=1)
        total = weights.sum()
        if total <= 0:
            raise RuntimeError("jump requested from a state with zero outgoing flux")
        k = int(np.searchsorted(np.cumsum(weights), rng.random() * total))
        k = min(k, len(weights) - 1)
        return cand[k] / np.sqrt(weights[k]), k

    def locate_jump(self, phi: np.ndarray, r: float, t_max: float) -> float | None:
        """First time the survival norm crosses r, or None if it stays above.

        The survival is monotone non-increasing, so multi-point bisection
        brackets the crossing and narrows it to BISECT_REL_TOL relative.
        """
        lo, hi = 0.0, t_max
        if self.norm_sq(phi, np.array([t_max]))[0] > r:
            return None
        while (hi - lo) > BISECT_REL_TOL * max(hi, 1e-300):
            ts = lo + (hi - lo) * self._fractions
            ns = self.norm_sq(phi, ts)
            idx = int(np.searchsorted(-ns, -r))  # first index with n <= r
            idx = min(max(idx, 1), _FANOUT - 1)
            lo, hi = ts[idx - 1], ts[idx]
        return 0.5 * (lo + hi)


def _ground_state(model: LindbladModel) -> np.ndarray:
    psi = np.zeros(model.dim, dtype=complex)
    psi[0] = 1.0
    return psi


def _run_single(engine: _JumpEngine, config: TrajectoryConfig, traj_index: int) -> ClickRecord:
    rng = np.random.Generator(
        np.random.Philox(key=np.array([config.seed, traj_index], dtype=np.uint64))
    )
    psi0 = config.initial if config.initial is not None else _ground_state(config.model)
    phi = engine.to_phi(psi0.astype(complex))
    phi = phi / np.sqrt(engine.norm_sq_one(phi))

    recorded = config.recorded
    rec_codes = set(
        range(len(engine.labels)) if recorded is None
        else (engine.labels.index(lab) for lab in recorded)
    )

    t = -config.warmup_resolved
    t_end = config.total_time
    times, codes = [], []
    pop_sum, n_samples = None, 0
    next_sample = 0.0
    if config.sample_every is not None:
        pop_sum = np.zeros(engine.dim)

    def sample_upto(t_seg_end):
        """Accumulate |psi|^2 at the sampling grid points inside a segment."""
        nonlocal next_sample, n_samples
        while next_sample < t_seg_end:
            z = engine.advance(phi, next_sample - t)
            psi = engine.s @ z
            w = np.abs(psi) ** 2
            pop_sum[:] += w / w.sum()
            n_samples += 1
            next_sample += config.sample_every

    while t < t_end:
        r = rng.random()
        dt = engine.locate_jump(phi, r, t_end - t)
        seg_end = t_end if dt is None else t + dt
        if pop_sum is not None:
            sample_upto(min(seg_end, t_end))
        if dt is None:
            break
        t += dt
        phi_t = engine.advance(phi, dt)
        phi_t /= np.sqrt(engine.norm_sq_one(phi_t))
        phi, k = engine.jump(phi_t, rng)
        if t >= 0 and k in rec_codes:
            times.append(t)
            codes.append(k)
    return ClickRecord(
        np.asarray(times, dtype=float),
        np.asarray(codes, dtype=np.int64),
        engine.labels,
        config.total_time,
        populations=None if pop_sum is None else pop_sum / max(n_samples, 1),
    )


def run(config: TrajectoryConfig, n_jobs: int = 1) -> list[ClickRecord]:
    """Simulate trajectories; deterministic per (seed, index) regardless of n_jobs."""
    engine = _JumpEngine(config.model)
    if n_jobs == 1:
        return [_run_single(engine, config, i) for i in range(config.n_trajectories)]
    return Parallel(n_jobs=n_jobs)(
        delayed(_run_single)(engine, config, i) for i in range(config.n_trajectories)
    )


def counting_distribution(
    records: list[ClickRecord],
    window: float,
    channel: str,
    n_cap: int = 30,
) -> CountingDistribution:
    """Histogram click counts over consecutive non-overlapping windows.

    Windows never straddle trajectories; the trailing partial window of each
    record is dropped.  Bins grow past n_cap if a window exceeds it, so no
    mass is silently clipped.
    """
    if not records:
        raise ValueError("no click records supplied")
    hist = np.zeros(n_cap + 1, dtype=float)
    n_windows = 0
    for rec in records:
        n_full = int(rec.duration / window)
        if n_full < 1:
            raise ValueError(
                f"window {window} longer than the recorded span {rec.duration}"
            )
        ts = rec.for_channel(channel)
        ts = ts[ts < n_full * window]
        counts = np.bincount((ts / window).astype(np.int64), minlength=n_full)
        top = int(counts.max()) if counts.size else 0
        if top >= hist.size:
            hist = np.concatenate([hist, np.zeros(top + 1 - hist.size)])
        hist[: top + 1] += np.bincount(counts, minlength=top + 1)[: top + 1]
        n_windows += n_full
    return CountingDistribution(window, hist / n_windows, n_windows)


def click_rate(records: list[ClickRecord], channel: str) -> tuple[float, float]:
    """Mean and standard error of the per-trajectory click rate on a channel."""
    rates = np.array([rec.for_channel(channel).size / rec.duration for rec in records])
    if rates.size < 2:
        return float(rates.mean()), float("inf")
    return float(rates.mean()), float(rates.std(ddof=1) / np.sqrt(rates.size))
