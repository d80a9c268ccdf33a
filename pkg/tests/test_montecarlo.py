import numpy as np
import pytest
from scipy import linalg as sla, stats

from biexciton import montecarlo as mc, solver
from biexciton.model import ModelConfig, build
from biexciton.montecarlo import ClickRecord, CountingDistribution, TrajectoryConfig


def poisson_record(rate: float, duration: float, seed: int) -> ClickRecord:
    """Synthetic homogeneous Poisson click train for calibration."""
    rng = np.random.default_rng(seed)
    n = rng.poisson(rate * duration)
    times = np.sort(rng.uniform(0.0, duration, n))
    times = times[np.concatenate(([True], np.diff(times) > 0))]
    return ClickRecord(times, np.zeros(times.size, dtype=np.int64), ("a",), duration)


class TestEngineBasics:
    def test_deterministic_given_seed(self, cavity_point):
        mdl, _, _ = cavity_point
        tc = TrajectoryConfig(mdl, total_time=50.0, n_trajectories=3, seed=99)
        r1 = mc.run(tc)
        r2 = mc.run(tc)
        for a, b in zip(r1, r2):
            assert np.array_equal(a.times, b.times)
            assert np.array_equal(a.channels, b.channels)

    def test_trajectory_index_controls_stream(self, cavity_point):
        mdl, _, _ = cavity_point
        tc = TrajectoryConfig(mdl, total_time=50.0, n_trajectories=2, seed=7)
        r = mc.run(tc)
        assert not np.array_equal(r[0].times, r[1].times)

    def test_empty_system_never_clicks(self):
        cfg = ModelConfig(chi=50.0, omega=0.0, g=0.0, kappa=4.0,
                          cavity="singleH", n_max=2)
        mdl = build(cfg)
        tc = TrajectoryConfig(mdl, total_time=200.0, n_trajectories=2, seed=1,
                              warmup=5.0)
        for rec in mc.run(tc):
            assert rec.times.size == 0

    def test_click_times_strictly_increasing_and_in_range(self, cavity_point):
        mdl, _, _ = cavity_point
        tc = TrajectoryConfig(mdl, total_time=80.0, n_trajectories=1, seed=3)
        rec = mc.run(tc)[0]
        assert np.all(np.diff(rec.times) > 0)
        assert rec.times[0] >= 0.0
        assert rec.times[-1] <= 80.0

    def test_survival_evolution_matches_expm(self, cavity_point):
        mdl, _, _ = cavity_point
        engine = mc._JumpEngine(mdl)
        h_eff = mdl.hamiltonian.matrix.astype(complex).copy()
        for op, rate, _ in mdl.collapse_ops:
            h_eff -= 0.5j * rate * (op.matrix.conj().T @ op.matrix)
        psi0 = np.zeros(mdl.dim, dtype=complex)
        psi0[2] = 1.0
        phi = engine.to_phi(psi0)
        for t in (0.1, 0.73, 2.0):
            direct = sla.expm(-1j * h_eff * t) @ psi0
            assert engine.norm_sq(phi, np.array([t]))[0] == pytest.approx(
                float(np.vdot(direct, direct).real), rel=1e-9)


class TestErgodicConsistency:
    def test_click_rate_matches_kappa_na(self, cavity_point):
        mdl, liouv, rho = cavity_point
        n_a, _, _ = solver.cavity_observables(liouv, rho)
        tc = TrajectoryConfig(mdl, total_time=400.0, n_trajectories=8, seed=42)
        rate, err = mc.click_rate(mc.run(tc), "a")
        assert abs(rate - mdl.config.kappa * n_a) < 3.0 * err

    def test_populations_match_steady_state(self, cavity_point):
        mdl, liouv, rho = cavity_point
        tc = TrajectoryConfig(mdl, total_time=400.0, n_trajectories=8, seed=42,
                              sample_every=0.7)
        recs = mc.run(tc)
        pops = np.array([r.populations for r in recs])
        mean = pops.mean(axis=0)
        err = pops.std(axis=0, ddof=1) / np.sqrt(len(recs))
        diag = np.diag(rho).real
        sig = np.abs(mean - diag) / np.maximum(err, 1e-12)
        # a couple of 3-sigma outliers among ~20 comparisons is expected noise
        assert np.median(sig) < 3.0
        assert np.all(sig < 5.0)


class TestCountingDistribution:
    def test_poisson_calibration(self):
        rate, duration, window = 2.0, 4000.0, 1.0
        recs = [poisson_record(rate, duration, s) for s in range(4)]
        dist = mc.counting_distribution(recs, window, "a")
        n = np.arange(dist.p.size)
        expected = stats.poisson.pmf(n, rate * window)
        observed = dist.p * dist.n_windows
        keep = expected * dist.n_windows > 5
        chi2 = ((observed[keep] - expected[keep] * dist.n_windows) ** 2
                / (expected[keep] * dist.n_windows)).sum()
        pval = stats.chi2.sf(chi2, keep.sum() - 1)
        assert pval > 0.05
        assert dist.mean == pytest.approx(rate * window, rel=0.05)

    def test_perfect_pair_emitter_has_no_odd_counts(self):
        rng = np.random.default_rng(0)
        base = np.sort(rng.uniform(0.0, 500.0, 300))
        times = np.sort(np.concatenate([base, base + 1e-9]))
        rec = ClickRecord(times, np.zeros(times.size, dtype=np.int64), ("a",), 500.0)
        dist = mc.counting_distribution([rec], 1.0, "a")
        assert dist.p[1::2].sum() == 0.0

    def test_window_longer_than_span_rejected(self):
        rec = poisson_record(1.0, 10.0, 0)
        with pytest.raises(ValueError):
            mc.counting_distribution([rec], 20.0, "a")

    def test_mean_equals_rate_times_window(self, cavity_point):
        mdl, liouv, rho = cavity_point
        tc = TrajectoryConfig(mdl, total_time=300.0, n_trajectories=4, seed=11)
        recs = mc.run(tc)
        rate, _ = mc.click_rate(recs, "a")
        for window in (0.5, 2.0):
            dist = mc.counting_distribution(recs, window, "a")
            assert dist.mean == pytest.approx(rate * window, rel=0.05)

    def test_normalization_validated(self):
        with pytest.raises(ValueError):
            CountingDistribution(1.0, np.array([0.5, 0.4]), 10)


class TestCountingStatisticsOracle:
    """Full-counting-statistics cross-check: the windowed count distribution
    of the cavity channel follows from the tilted generator
    L_s = L + (s - 1) J with J rho = kappa a rho a+, evaluated by FFT over
    the unit circle in s.  Entirely independent of the jump unraveling."""

    def fcs_pmf(self, liouv, rho, window, n_max_counts=64):
        mdl = liouv.model
        a = mdl.operators["a"].matrix
        jump = mdl.config.kappa * np.kron(a.conj(), a)
        d = mdl.dim
        trace_vec = np.zeros(d * d)
        trace_vec[:: d + 1] = 1.0
        probs = []
        ss = np.exp(2j * np.pi * np.arange(n_max_counts) / n_max_counts)
        vals = []
        for s in ss:
            prop = sla.expm((liouv.matrix + (s - 1.0) * jump) * window)
            vals.append(trace_vec @ (prop @ solver.vec(rho)))
        return np.real(np.fft.fft(np.asarray(vals))) / n_max_counts

    def test_distribution_against_generating_function(self):
        cfg = ModelConfig(chi=4000.0, omega=2000.0, kappa=10.0, g=100.0,
                          delta_c=0.0, cavity="singleH", n_max=3)
        mdl = build(cfg)
        liouv = solver.liouvillian(mdl)
        rho = solver.steady_state(liouv)
        window = 1.5
        pmf = self.fcs_pmf(liouv, rho, window)
        tc = TrajectoryConfig(mdl, total_time=1500.0, n_trajectories=6, seed=5,
                              recorded=("a",))
        dist = mc.counting_distribution(mc.run(tc), window, "a")
        n = min(pmf.size, dist.p.size)
        counts = dist.p[:n] * dist.n_windows
        expected = pmf[:n] * dist.n_windows
        keep = expected > 5
        chi2 = ((counts[keep] - expected[keep]) ** 2 / expected[keep]).sum()
        pval = stats.chi2.sf(chi2, keep.sum())
        assert pval > 0.01

    def test_second_factorial_moment_matches_g2(self, cavity_point):
        mdl, liouv, rho = cavity_point
        n_a, g2, _ = solver.cavity_observables(liouv, rho)
        window = 0.05
        tc = TrajectoryConfig(mdl, total_time=600.0, n_trajectories=8, seed=21,
                              recorded=("a",))
        recs = mc.run(tc)
        per_traj = []
        for rec in recs:
            dist = mc.counting_distribution([rec], window, "a")
            per_traj.append(dist.factorial_moment(2) / dist.mean ** 2)
        per_traj = np.asarray(per_traj)
        err = per_traj.std(ddof=1) / np.sqrt(per_traj.size)
        assert abs(per_traj.mean() - g2) < 3.0 * err
