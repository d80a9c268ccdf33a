import numpy as np
import pytest
from scipy import stats

from biexciton import counting as ct
from biexciton.counting import (
    CothermalParams, bell_complete, convolved_pmf, cothermal_pmf,
    exponent_derivatives, fit_counting, purity_split,
)
from biexciton.montecarlo import CountingDistribution

BELL_NUMBERS = [1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975,
                678570, 4213597, 27644437, 190899322, 1382958545]


class TestBellPolynomials:
    def test_bell_numbers_through_15(self):
        for n in range(16):
            assert bell_complete([1.0] * n) == pytest.approx(BELL_NUMBERS[n], rel=1e-12)

    def test_low_order_symbolic(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            a1, a2, a3 = rng.uniform(-3, 3, 3)
            assert bell_complete([a1]) == pytest.approx(a1)
            assert bell_complete([a1, a2]) == pytest.approx(a1**2 + a2)
            assert bell_complete([a1, a2, a3]) == pytest.approx(
                a1**3 + 3 * a1 * a2 + a3)

    def test_empty_case(self):
        assert bell_complete([]) == 1.0


class TestExponentDerivatives:
    def test_structure(self):
        p = CothermalParams(0.7, 1.1, 0.3)
        a = exponent_derivatives(p, 8)
        assert a[0] == pytest.approx(0.7)
        assert a[1] == pytest.approx(2 * 1.1 + 2 * 0.3)
        assert a[2] == 0.0  # odd orders carry no weight
        assert a[3] == pytest.approx(2 * 0.3**2 * 6.0)  # 2 theta^2 (4-1)!
        assert a[5] == pytest.approx(2 * 0.3**3 * 120.0)


class TestCothermalPmf:
    def test_poisson_limit(self):
        p = cothermal_pmf(CothermalParams(0.9, 0.0, 0.0), 40)
        assert np.allclose(p, stats.poisson.pmf(np.arange(41), 0.9), atol=1e-14)

    def test_thermal_pairs_limit(self):
        theta = 0.35
        p = cothermal_pmf(CothermalParams(0.0, 0.0, theta), 60)
        k = np.arange(25)
        assert np.allclose(p[2 * k], (1 - theta) * theta**k, atol=1e-14)
        assert p[1::2].sum() == 0.0

    def test_coherent_pairs_limit(self):
        mu = 1.3
        p = cothermal_pmf(CothermalParams(0.0, mu, 0.0), 60)
        k = np.arange(25)
        assert np.allclose(p[2 * k], stats.poisson.pmf(k, mu), atol=1e-14)

    def test_odd_counts_vanish_without_singles(self):
        rng = np.random.default_rng(4)
        for _ in range(25):
            p = cothermal_pmf(
                CothermalParams(0.0, rng.uniform(0, 3), rng.uniform(0, 0.7)), 80,
                coverage_tol=np.inf)
            assert p[1::2].sum() == 0.0

    def test_matches_convolution_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            params = CothermalParams(rng.uniform(0, 5), rng.uniform(0, 5),
                                     rng.uniform(0, 0.8))
            a = cothermal_pmf(params, 130, coverage_tol=np.inf)
            b = convolved_pmf(params, 130)
            assert np.max(np.abs(a - b)) < 1e-10

    def test_coverage_inside_validated_box(self):
        rng = np.random.default_rng(9)
        for _ in range(40):
            params = CothermalParams(rng.uniform(0, 1.5), rng.uniform(0, 1.5),
                                     rng.uniform(0, 0.45))
            p = cothermal_pmf(params, 60)
            assert p.sum() >= 1.0 - 1e-9

    def test_undercoverage_reported(self):
        with pytest.raises(ValueError):
            cothermal_pmf(CothermalParams(5.0, 5.0, 0.8), 60)


class TestPurity:
    def test_no_singles_means_unit_purity(self):
        for l2, th in ((1.0, 0.0), (0.0, 0.4), (2.5, 0.6)):
            pi, _, _ = purity_split(CothermalParams(0.0, l2, th))
            assert pi == 1.0

    def test_equal_split(self):
        pi, pi_t, pi_l = purity_split(CothermalParams(1.3, 1.3, 0.0))
        assert pi == pytest.approx(0.5)
        assert pi_t == 0.0
        assert pi_l == pytest.approx(0.5)

    def test_worked_example(self):
        pi, pi_t, pi_l = purity_split(CothermalParams(1.0, 2.0, 0.5))
        assert pi == pytest.approx(0.75)
        assert pi_t + pi_l == pytest.approx(pi, abs=1e-12)

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            purity_split(CothermalParams(0.0, 0.0, 0.0))


def synthetic_distribution(params, n_windows, seed, n_cap=40):
    pmf = cothermal_pmf(params, n_cap, coverage_tol=np.inf)
    pmf = pmf / pmf.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(n_windows, pmf)
    return CountingDistribution(1.0, counts / n_windows, n_windows)


class TestFit:
    def test_round_trip_recovery(self):
        truth = CothermalParams(0.5, 0.3, 0.2)
        dist = synthetic_distribution(truth, 1_000_000, seed=12)
        fit = fit_counting(dist, n_bootstrap=20, seed=0)
        assert fit.params.lambda1 == pytest.approx(truth.lambda1, rel=0.05)
        assert fit.params.lambda2 == pytest.approx(truth.lambda2, rel=0.05)
        assert fit.params.theta2 == pytest.approx(truth.theta2, rel=0.05)
        assert fit.purity == pytest.approx(purity_split(truth)[0], rel=0.05)
        assert fit.identifiable

    def test_pure_poisson_input(self):
        dist = synthetic_distribution(CothermalParams(1.2, 0.0, 0.0), 400_000, seed=3)
        fit = fit_counting(dist, n_bootstrap=0)
        assert fit.params.lambda2 <= 1e-3
        assert fit.params.theta2 <= 1e-3
        assert fit.purity <= 1e-2

    def test_purity_split_consistency(self):
        dist = synthetic_distribution(CothermalParams(0.4, 0.6, 0.3), 200_000, seed=5)
        fit = fit_counting(dist, n_bootstrap=0)
        assert fit.purity == pytest.approx(fit.purity_thermal + fit.purity_coherent,
                                           abs=1e-12)

    def test_subsampling_stability(self):
        truth = CothermalParams(0.5, 0.4, 0.25)
        full = synthetic_distribution(truth, 200_000, seed=8)
        half = synthetic_distribution(truth, 100_000, seed=9)
        fit_full = fit_counting(full, n_bootstrap=30, seed=1)
        fit_half = fit_counting(half, n_bootstrap=30, seed=2)
        spread = max(fit_full.spread["pi"], fit_half.spread["pi"])
        assert abs(fit_full.purity - fit_half.purity) < 3.0 * spread

    def test_too_few_bins_rejected(self):
        dist = CountingDistribution(1.0, np.array([0.5, 0.5]), 100)
        with pytest.raises(ValueError):
            fit_counting(dist, n_bootstrap=0)

    def test_json_record_fields(self):
        dist = synthetic_distribution(CothermalParams(0.5, 0.3, 0.2), 50_000, seed=4)
        fit = fit_counting(dist, n_bootstrap=0)
        rec = fit.to_dict()
        assert set(rec) == {"lambda1", "lambda2", "theta2", "pi", "pi_theta",
                            "pi_lambda", "residual"}

    def test_sparse_data_flags_non_identifiable(self):
        # 150 windows cannot pin the lambda2/theta2 trade-off
        pmf = cothermal_pmf(CothermalParams(0.3, 0.12, 0.1), 30,
                            coverage_tol=np.inf)
        counts = np.random.default_rng(1).multinomial(150, pmf / pmf.sum())
        dist = CountingDistribution(1.0, counts / 150, 150)
        fit = fit_counting(dist, n_bootstrap=25, seed=1)
        assert not fit.identifiable

    def test_coherent_only_mode_pins_theta(self):
        dist = synthetic_distribution(CothermalParams(0.2, 0.1, 0.4), 100_000, seed=6)
        fit = fit_counting(dist, n_bootstrap=0, thermal=False)
        assert fit.params.theta2 <= 1e-12
        full = fit_counting(dist, n_bootstrap=0)
        assert full.residual < fit.residual


class TestResonanceICountingData:
    """Counting records from the bright central two-photon resonance: the
    thermal pair component is essential there (bunched bundles), so the
    cothermal ansatz must beat the coherent-only one and the thermal purity
    share must dominate the coherent share."""

    @pytest.fixture(scope="class")
    def resonance_i_distribution(self):
        from biexciton import montecarlo as mc
        from biexciton.model import ModelConfig, build
        cfg = ModelConfig(chi=4000.0, omega=8000.0, kappa=10.0, g=100.0,
                          delta_c=0.0, cavity="singleH", n_max=5)
        mdl = build(cfg)
        window = 4.0
        tc = mc.TrajectoryConfig(mdl, total_time=2000.0, n_trajectories=4,
                                 seed=13, recorded=("a",))
        return mc.counting_distribution(mc.run(tc), window, "a")

    def test_cothermal_beats_coherent_only(self, resonance_i_distribution):
        both = fit_counting(resonance_i_distribution, n_bootstrap=0)
        coherent = fit_counting(resonance_i_distribution, n_bootstrap=0,
                                thermal=False)
        assert both.residual < 0.5 * coherent.residual

    def test_thermal_share_dominates(self, resonance_i_distribution):
        fit = fit_counting(resonance_i_distribution, n_bootstrap=0)
        assert fit.purity_thermal > fit.purity_coherent
