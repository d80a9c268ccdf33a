"""Photon-counting model: coherent singles + coherent pairs + thermal pairs.

The count distribution of light built from a coherent one-photon process
(mean lambda1), a coherent two-photon process (pair mean lambda2) and a
thermal two-photon process (parameter theta2) has the exponential
generating function exp(g(s)) with

    g(s) = -lambda1 (1 - s) - lambda2 (1 - s^2) + log((1 - theta2)/(1 - s^2 theta2))

so p(n) = exp(g(0)) B_n(a_1 .. a_n) / n! with a_n the n-th derivative of g
at zero and B_n the complete Bell polynomial.  Fitting this to a measured
window-count histogram splits the emission into single-photon and pair
components; the pair fraction of the mean is the purity.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, lgamma

import numpy as np
from joblib import Parallel, delayed
from scipy import optimize, stats

from .montecarlo import CountingDistribution


def bell_complete(a) -> float:
    """Complete Bell polynomial B_n(a_1, ..., a_n) for n = len(a).

    Uses the binomial recurrence B_{m+1} = sum_k C(m, k) B_{m-k} a_{k+1};
    B_0 = 1.  At unit arguments this generates the Bell numbers.
    """
    a = list(a)
    n = len(a)
    b = [1.0]
    for m in range(n):
        b.append(sum(comb(m, k) * b[m - k] * a[k] for k in range(m + 1)))
    return float(b[n])


@dataclass(frozen=True)
class CothermalParams:
    """Component strengths of the three processes.

    The process means are lambda1 (coherent singles), lambda2 (coherent
    pairs) and theta2/(1-theta2) (thermal pairs); the purity is the pair
    share of their sum.
    """

    lambda1: float
    lambda2: float
    theta2: float

    def __post_init__(self):
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("coherent means must be non-negative")
        if not 0.0 <= self.theta2 < 1.0:
            raise ValueError("thermal parameter must lie in [0, 1)")

    @property
    def pair_mean_thermal(self) -> float:
        return self.theta2 / (1.0 - self.theta2)


def exponent_derivatives(params: CothermalParams, n: int) -> np.ndarray:
    """a_k = g^(k)(0) for k = 1..n: lambda1, 2 lambda2 + thermal, thermal tail."""
    a = np.zeros(n)
    if n >= 1:
        a[0] = params.lambda1
    for k in range(2, n + 1, 2):
        a[k - 1] = 2.0 * params.theta2 ** (k // 2) * np.exp(lgamma(k))
    if n >= 2:
        a[1] += 2.0 * params.lambda2
    return a


def cothermal_pmf(params: CothermalParams, n_cap: int = 60,
                  coverage_tol: float = 1e-9) -> np.ndarray:
    """p(0..n_cap) of the combined process.

    Evaluated with the factorially scaled recurrence beta_m = B_m/m!,
    beta_{m+1} = sum_k (a_{k+1}/k!) beta_{m-k} / (m+1), which never forms the
    (k-1)! factors explicitly and so cannot overflow.  Raises when the cap
    leaves more than `coverage_tol` of probability uncovered.
    """
    lam1, lam2, th2 = params.lambda1, params.lambda2, params.theta2
    # scaled[k] = a_{k+1}/k!: the (k+1-even) thermal terms 2 theta2^((k+1)/2) (k)!
    # cancel their factorial exactly.
    scaled = np.zeros(n_cap + 1)
    if n_cap >= 1:
        scaled[0] = lam1
    if n_cap >= 2:
        scaled[1] = 2.0 * (lam2 + th2)
    for k in range(3, n_cap + 1, 2):
        scaled[k] = 2.0 * th2 ** ((k + 1) // 2)
    beta = np.zeros(n_cap + 1)
    beta[0] = 1.0
    for m in range(n_cap):
        beta[m + 1] = scaled[: m + 1] @ beta[m::-1] / (m + 1)
    g0 = -lam1 - lam2 + np.log1p(-th2)
    p = np.exp(g0) * beta
    missing = 1.0 - p.sum()
    if missing > coverage_tol:
        raise ValueError(
            f"n_cap {n_cap} covers only 1 - {missing:.2e} of the distribution"
        )
    return p


def component_pmfs(params: CothermalParams, n_cap: int) -> tuple[np.ndarray, ...]:
    """The three constituent distributions, for the convolution cross-check.

    Singles are Poisson(lambda1); coherent pairs put Poisson(lambda2) weight
    on even counts; thermal pairs are geometric in the pair number.
    """
    n = np.arange(n_cap + 1)
    k = np.arange(n_cap // 2 + 1)
    singles = stats.poisson.pmf(n, params.lambda1)
    pairs_coh = np.zeros(n_cap + 1)
    pairs_coh[2 * k] = stats.poisson.pmf(k, params.lambda2)
    pairs_th = np.zeros(n_cap + 1)
    pairs_th[2 * k] = (1.0 - params.theta2) * params.theta2 ** k
    return singles, pairs_coh, pairs_th


def convolved_pmf(params: CothermalParams, n_cap: int = 60) -> np.ndarray:
    """Independent oracle: numerical convolution of the three component PMFs."""
    pmfs = component_pmfs(params, n_cap)
    out = pmfs[0]
    for q in pmfs[1:]:
        out = np.convolve(out, q)[: n_cap + 1]
    return out


def purity_split(params: CothermalParams) -> tuple[float, float, float]:
    """(purity, thermal part, coherent part): pair fraction of the mean.

    purity = (th + lambda2) / (lambda1 + lambda2 + th), th = theta2/(1-theta2),
    split into the thermal and coherent pair contributions.
    """
    th = params.pair_mean_thermal
    denom = params.lambda1 + params.lambda2 + th
    if denom <= 0:
        raise ValueError("purity undefined for an all-zero parameter set")
    return (th + params.lambda2) / denom, th / denom, params.lambda2 / denom


@dataclass
class CothermalFit:
    """Fit result with purity decomposition and bootstrap uncertainty."""

    params: CothermalParams
    purity: float
    purity_thermal: float
    purity_coherent: float
    residual: float
    spread: dict[str, float]
    identifiable: bool = True

    def to_dict(self) -> dict:
        return {
            "lambda1": self.params.lambda1,
            "lambda2": self.params.lambda2,
            "theta2": self.params.theta2,
            "pi": self.purity,
            "pi_theta": self.purity_thermal,
            "pi_lambda": self.purity_coherent,
            "residual": self.residual,
        }


_THETA_MAX = 0.999


def _ls_residual(x: np.ndarray, p_emp: np.ndarray) -> np.ndarray:
    params = CothermalParams(max(x[0], 0.0), max(x[1], 0.0), min(max(x[2], 0.0), _THETA_MAX))
    p_model = cothermal_pmf(params, p_emp.size - 1, coverage_tol=np.inf)
    return p_model - p_emp


def _best_fit(p_emp: np.ndarray, starts: np.ndarray,
              theta_max: float = _THETA_MAX) -> tuple[CothermalParams, float, int]:
    best = None
    for i, x0 in enumerate(starts):
        x0 = np.minimum(x0, [np.inf, np.inf, theta_max * 0.99])
        sol = optimize.least_squares(
            _ls_residual, x0, args=(p_emp,),
            bounds=([0.0, 0.0, 0.0], [np.inf, np.inf, theta_max]),
            xtol=1e-14, ftol=1e-14, gtol=1e-14,
        )
        cost = 2.0 * sol.cost  # least_squares reports 1/2 sum of squares
        if best is None or cost < best[1] - 1e-18:
            best = (sol.x, cost, i)
    x, cost, idx = best
    return CothermalParams(x[0], x[1], min(x[2], theta_max)), cost, idx


def _start_grid(mean: float) -> np.ndarray:
    """Eight starts spreading the observed mean across the three components."""
    m = max(mean, 1e-3)
    starts = []
    for lam1_frac in (0.05, 0.5, 0.95):
        for pair_theta_frac in (0.1, 0.9):
            lam1 = lam1_frac * m
            pair_mean = (1.0 - lam1_frac) * m / 2.0
            th_mean = pair_theta_frac * pair_mean
            theta2 = th_mean / (1.0 + th_mean)
            starts.append([lam1, pair_mean - th_mean, theta2])
    starts.append([m, 1e-4, 1e-4])
    starts.append([1e-4, m / 2.0, 1e-4])
    return np.array(starts)


def fit_counting(
    dist: CountingDistribution,
    n_bootstrap: int = 50,
    seed: int = 0,
    n_jobs: int = 1,
    thermal: bool = True,
) -> CothermalFit:
    """Least-squares fit of the cothermal model to a counting histogram.

    Multi-start (8+ starts over mean splittings), best residual wins, ties by
    start index.  Uncertainty from multinomial bootstrap over windows; the
    fit is flagged non-identifiable when the bootstrap spread of any pair
    parameter exceeds half its value.  thermal=False restricts to the
    coherent-only ansatz (theta2 pinned at 0) for residual comparisons.
    """
    p_emp = np.asarray(dist.p, dtype=float)
    if np.count_nonzero(p_emp) < 3:
        raise ValueError("need at least 3 occupied bins to fit three parameters")
    theta_max = _THETA_MAX if thermal else 1e-12
    starts = _start_grid(dist.mean)
    params, cost, _ = _best_fit(p_emp, starts, theta_max)
    pi, pi_t, pi_l = purity_split(params)

    rng = np.random.default_rng(seed)
    boot_seeds = rng.integers(0, 2**63, size=n_bootstrap)

    def one_boot(s):
        r = np.random.default_rng(s)
        counts = r.multinomial(dist.n_windows, p_emp)
        pb, _, _ = _best_fit(counts / dist.n_windows, starts, theta_max)
        return [pb.lambda1, pb.lambda2, pb.theta2, purity_split(pb)[0]]

    if n_bootstrap > 0:
        rows = Parallel(n_jobs=n_jobs)(delayed(one_boot)(s) for s in boot_seeds)
        arr = np.asarray(rows)
        spread = {
            "lambda1": float(arr[:, 0].std(ddof=1)),
            "lambda2": float(arr[:, 1].std(ddof=1)),
            "theta2": float(arr[:, 2].std(ddof=1)),
            "pi": float(arr[:, 3].std(ddof=1)),
        }
    else:
        spread = {k: float("nan") for k in ("lambda1", "lambda2", "theta2", "pi")}

    identifiable = True
    for name, value in (("lambda2", params.lambda2), ("theta2", params.theta2)):
        if value > 1e-6 and np.isfinite(spread[name]) and spread[name] > 0.5 * value:
            identifiable = False
    return CothermalFit(params, pi, pi_t, pi_l, cost, spread, identifiable)
