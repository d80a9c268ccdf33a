import numpy as np
import pytest

from biexciton import dressed, hilbert, solver
from biexciton.hilbert import CompositeSpace, Operator, boson_annihilator, boson_factor
from biexciton.model import LindbladModel, ModelConfig, build
from biexciton.solver import (
    cavity_observables, emission_spectrum, find_peaks_grid, liouvillian,
    propagate_to_steady, spectrum_by_transform, steady_state, two_time_correlator,
    unvec, vec,
)


def qubit_model(gamma=1.0, omega=0.0, drive=0.0) -> LindbladModel:
    """Bare two-level system: splitting omega, decay gamma, optional drive."""
    space = CompositeSpace((hilbert.qubit_factor(),))
    sm = hilbert.qubit_lowering()
    h = omega * (sm.dag() @ sm) + drive * (sm + sm.dag())
    cfg = ModelConfig(chi=1.0, omega=0.0)
    return LindbladModel(space, h, [(sm, gamma, "decay")], cfg, {"sm": sm})


def driven_cavity_model(delta=0.0, drive=0.4, kappa=2.0, n_max=8) -> LindbladModel:
    space = CompositeSpace((boson_factor(n_max),))
    a = boson_annihilator(space, 0)
    h = delta * (a.dag() @ a) + drive * (a + a.dag())
    cfg = ModelConfig(chi=1.0, omega=0.0)
    return LindbladModel(space, h, [(a, kappa, "a")], cfg, {"a": a})


class TestLiouvillian:
    def test_pure_hamiltonian_spectrum_imaginary(self):
        mdl = qubit_model(gamma=1.0, omega=3.0)
        mdl = LindbladModel(mdl.space, mdl.hamiltonian, [(mdl.operators["sm"], 1e-300, "x")],
                            mdl.config, mdl.operators)
        d = mdl.dim
        ident = np.eye(d)
        h = mdl.hamiltonian.matrix
        lmat = -1j * (np.kron(ident, h) - np.kron(h.T, ident))
        lam = np.linalg.eigvals(lmat)
        assert np.max(np.abs(lam.real)) < 1e-12

    def test_decaying_qubit_eigenvalues(self):
        gamma, omega = 1.7, 2.4
        liouv = liouvillian(qubit_model(gamma=gamma, omega=omega))
        lam = np.sort_complex(np.linalg.eigvals(liouv.matrix))
        expected = np.sort_complex(np.array(
            [0.0, -gamma, -gamma / 2 + 1j * omega, -gamma / 2 - 1j * omega]
        ))
        assert np.allclose(lam, expected, atol=1e-12)

    def test_trace_functional_annihilated(self):
        liouv = liouvillian(build(ModelConfig(chi=30.0, omega=5.0)))
        d = liouv.dim
        trace_vec = np.zeros(d * d)
        trace_vec[:: d + 1] = 1.0
        assert np.max(np.abs(trace_vec @ liouv.matrix)) < 1e-10


class TestSteadyState:
    def test_empty_system_settles_to_ground(self):
        cfg = ModelConfig(chi=40.0, omega=0.0, g=0.0, kappa=2.0,
                          cavity="singleH", n_max=2)
        rho = steady_state(liouvillian(build(cfg)))
        expected = np.zeros((12, 12))
        expected[0, 0] = 1.0
        assert np.allclose(rho, expected, atol=1e-10)

    def test_state_invariants_and_residual(self):
        cfg = ModelConfig(chi=4000.0, omega=1000.0, g=100.0, kappa=10.0,
                          delta_c=123.0, cavity="singleH", n_max=3)
        liouv = liouvillian(build(cfg))
        rho = steady_state(liouv)
        assert abs(np.trace(rho) - 1.0) < 1e-10
        assert np.max(np.abs(rho - rho.conj().T)) < 1e-10
        assert np.linalg.eigvalsh(rho).min() > -1e-8
        assert np.linalg.norm(liouv.matrix @ vec(rho)) < 1e-10 * np.linalg.norm(
            liouv.matrix, ord=np.inf)

    def test_matches_long_time_propagation(self):
        cfg = ModelConfig(chi=4000.0, omega=100.0, g=100.0, kappa=10.0,
                          cavity="singleH", n_max=4)
        liouv = liouvillian(build(cfg))
        rho_direct = steady_state(liouv)
        rho_prop = propagate_to_steady(liouv, tol=1e-12)
        assert np.linalg.norm(rho_direct - rho_prop) < 1e-6

    def test_degenerate_kernel_reported(self):
        # two disconnected qubits-as-one-model: no coupling between sectors
        space = CompositeSpace((hilbert.qubit_factor(), hilbert.qubit_factor()))
        sm1 = hilbert.embed(hilbert.qubit_lowering(), space, 0)
        h = Operator(space, np.zeros((4, 4)))
        cfg = ModelConfig(chi=1.0, omega=0.0)
        mdl = LindbladModel(space, h, [(sm1, 1.0, "d1")], cfg, {})
        with pytest.raises(solver.DegenerateSteadyStateError):
            steady_state(liouvillian(mdl), check_unique=True)


class TestTwoTimeCorrelator:
    def test_identity_gives_constant(self, fig1c):
        mdl, liouv, rho = fig1c
        ident = np.eye(mdl.dim, dtype=complex)
        sv = mdl.operators["sigma_V"].matrix
        taus = np.linspace(0.0, 3.0, 7)
        series = two_time_correlator(liouv, rho, ident, sv, taus)
        expected = solver.expectation(sv, rho)
        assert np.allclose(series, expected, atol=1e-10)

    def test_tau_zero_matches_static_moment(self, cavity_point):
        mdl, liouv, rho = cavity_point
        a = mdl.operators["a"].matrix
        series = two_time_correlator(liouv, rho, a.conj().T, a, np.array([0.0]))
        n_a = solver.expectation(a.conj().T @ a, rho)
        assert abs(series[0] - n_a) < 1e-10

    def test_weak_coupling_filter_linewidth(self):
        # narrow cavity (kappa well below the unit source linewidth) parked on
        # a line: the long-time correlator envelope decays at the filter
        # half-width kappa/2
        kappa = 0.2
        line = dressed.one_photon_lines(200.0, 40.0)["I"]
        cfg = ModelConfig(chi=200.0, omega=40.0, g=0.05, kappa=kappa,
                          delta_c=line, cavity="singleH", n_max=2)
        liouv = liouvillian(build(cfg))
        rho = steady_state(liouv)
        a = liouv.model.operators["a"].matrix
        taus = np.linspace(15.0, 40.0, 26)
        series = two_time_correlator(liouv, rho, a.conj().T, a, taus)
        slope = np.polyfit(taus, np.log(np.abs(series)), 1)[0]
        assert slope == pytest.approx(-kappa / 2, rel=0.01)

    def test_unsorted_grid_rejected(self, fig1c):
        mdl, liouv, rho = fig1c
        ident = np.eye(mdl.dim, dtype=complex)
        with pytest.raises(ValueError):
            two_time_correlator(liouv, rho, ident, ident, np.array([1.0, 0.5]))


class TestEmissionSpectrum:
    def test_h_polarized_peaks(self, fig1c):
        mdl, liouv, rho = fig1c
        grid = np.arange(-1550.0, 1550.0, 0.2)
        spec = emission_spectrum(liouv, rho, mdl.operators["sigma_H"].matrix, grid, "H")
        peaks = find_peaks_grid(grid, spec.values, 1e-3)
        expected = [-1366.03, -1000.0, -366.03, 366.03, 1000.0, 1366.03]
        assert len(peaks) == 6
        assert np.allclose(sorted(peaks), expected, atol=1.0)
        center = spec.values[np.argmin(np.abs(grid))]
        assert center < 0.01 * spec.values.max()
        assert spec.values.min() > -1e-8

    def test_v_polarized_has_seven_peaks_including_center(self, fig1c):
        mdl, liouv, rho = fig1c
        grid = np.arange(-1950.0, 1950.0, 0.2)
        spec = emission_spectrum(liouv, rho, mdl.operators["sigma_V"].matrix, grid, "V")
        peaks = find_peaks_grid(grid, spec.values, 1e-3)
        assert len(peaks) == 7
        assert np.min(np.abs(peaks)) < 1.0  # central line at the drive frequency

    def test_sum_rule(self, fig1c):
        from scipy.integrate import simpson
        mdl, liouv, rho = fig1c
        op = mdl.operators["sigma_H"].matrix
        grid = np.arange(-20000.0, 20000.0, 0.5)
        spec = emission_spectrum(liouv, rho, op, grid, "H")
        total = simpson(spec.values, x=grid)
        target = np.pi * (solver.expectation(op.conj().T @ op, rho).real
                          - abs(solver.expectation(op, rho)) ** 2)
        assert total == pytest.approx(target, rel=0.02)

    def test_peak_positions_match_line_predictions(self):
        for chi, omega in ((100.0, 10.0), (500.0, 50.0), (1000.0, 300.0),
                           (2000.0, 500.0), (4000.0, 1000.0)):
            cfg = ModelConfig(chi=chi, omega=omega)
            liouv = liouvillian(build(cfg))
            rho = steady_state(liouv)
            lines = dressed.one_photon_lines(chi, omega)
            span = 1.2 * abs(lines["III"])
            grid = np.linspace(-span, span, int(2 * span / 0.1) + 1)
            spec = emission_spectrum(liouv, rho, liouv.model.operators["sigma_H"].matrix,
                                     grid, "H")
            peaks = find_peaks_grid(grid, spec.values, 1e-2)
            for det in lines.values():
                assert np.min(np.abs(peaks - det)) < 0.5

    def test_transform_path_agrees(self):
        cfg = ModelConfig(chi=50.0, omega=5.0)
        liouv = liouvillian(build(cfg))
        rho = steady_state(liouv)
        op = liouv.model.operators["sigma_H"].matrix
        grid = np.array([-27.0, -25.0, -20.0, 0.0, 10.0, 25.0, 26.0])
        eig_path = emission_spectrum(liouv, rho, op, grid, "H").values
        num_path = spectrum_by_transform(liouv, rho, op, grid, t_max=80.0, dt=0.002)
        assert np.max(np.abs(eig_path - num_path)) < 1e-6

    def test_coarse_grid_warns(self, fig1c):
        mdl, liouv, rho = fig1c
        with pytest.warns(UserWarning):
            emission_spectrum(liouv, rho, mdl.operators["sigma_H"].matrix,
                              np.linspace(-100, 100, 21), "H")


class TestCavityObservables:
    def test_vacuum_guard(self):
        cfg = ModelConfig(chi=40.0, omega=0.0, g=0.0, kappa=2.0,
                          cavity="singleH", n_max=4)
        liouv = liouvillian(build(cfg))
        rho = steady_state(liouv)
        n, g2, g2p = cavity_observables(liouv, rho)
        assert n == 0.0
        assert np.isnan(g2) and np.isnan(g2p)

    def test_displaced_vacuum_is_poissonian(self):
        liouv = liouvillian(driven_cavity_model(drive=0.35, kappa=2.0, n_max=12))
        rho = steady_state(liouv)
        n, g2, g2p = cavity_observables(liouv, rho, mode="a")
        assert n == pytest.approx((2 * 0.35 / 2.0) ** 2, rel=1e-9)
        assert g2 == pytest.approx(1.0, abs=1e-6)
        assert g2p == pytest.approx(1.0, abs=1e-6)

    def test_truncation_guard(self):
        cfg = ModelConfig(chi=40.0, omega=5.0, g=1.0, kappa=2.0,
                          cavity="singleH", n_max=3)
        liouv = liouvillian(build(cfg))
        rho = steady_state(liouv)
        with pytest.raises(ValueError):
            cavity_observables(liouv, rho)
        n, g2, g2p = cavity_observables(liouv, rho, pairs=False)
        assert np.isfinite(n) and np.isfinite(g2) and np.isnan(g2p)


def test_vec_unvec_roundtrip():
    rng = np.random.default_rng(5)
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    assert np.array_equal(unvec(vec(m)), m)
    a, b, x = (rng.normal(size=(6, 6)) for _ in range(3))
    assert np.allclose(np.kron(b.T, a) @ vec(x), vec(a @ x @ b))
