"""Named presets reproducing the headline data sets as CSV/JSON tables.

Each scenario owns a frozen parameter set (asserted against a table in the
tests), writes its outputs plus a manifest into a directory, and is
deterministic for fixed inputs.  Rendering is a separate package's job; only
data tables are produced here.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import dressed, io, montecarlo, solver, twophoton
from .counting import CothermalFit, fit_counting
from .model import ModelConfig, build

RESONANCES = ("I", "II", "III", "IV")

#: Frozen scenario parameter table (energies in units of the exciton decay).
PRESETS: dict[str, ModelConfig] = {
    "fig1c": ModelConfig(chi=2e3, omega=5e2, g=0.0, kappa=0.0, cavity="none"),
    "fig2a": ModelConfig(chi=4e3, omega=1e3, g=0.0, kappa=0.0, cavity="none"),
    "fig2b": ModelConfig(chi=4e3, omega=1e3, g=1e2, kappa=10.0, cavity="singleH"),
    "fig3": ModelConfig(chi=4e3, omega=1e3, g=0.0, kappa=0.0, cavity="none"),
    "fig4": ModelConfig(chi=4e3, omega=1e3, g=1e2, kappa=10.0, cavity="singleH", n_max=5),
    "fig5": ModelConfig(chi=4e3, omega=8e3, g=1e2, kappa=10.0, cavity="dualHV",
                        drive="circular", n_max=3),
}

DETECTOR_LINEWIDTH = 10.0


def spectrum_grid(chi: float, omega: float, step: float = 0.25) -> np.ndarray:
    """Detuning grid resolving unit-width lines out to the widest dressed line."""
    eig = dressed.eigensystem(chi, omega)
    span = 1.1 * (eig.delta_plus - eig.delta_minus)
    n = int(2 * span / step) + 1
    return np.linspace(-span, span, n)


def _sha_rows(arr):
    return list(np.atleast_2d(arr))


def run_fig1c(out: Path, config: ModelConfig, step: float = 0.25) -> list[Path]:
    """Emission spectra of the bare driven system in both polarizations."""
    mdl = build(config)
    liouv = solver.liouvillian(mdl)
    rho = solver.steady_state(liouv)
    grid = spectrum_grid(config.chi, config.omega, step)
    files = []
    for pol in ("H", "V"):
        spec = solver.emission_spectrum(
            liouv, rho, mdl.operators[f"sigma_{pol}"].matrix, grid, pol
        )
        files.append(io.write_csv(
            out / f"spectrum_{pol}.csv", ["detuning", "value"],
            zip(spec.detuning, spec.values),
        ))
    files.append(_write_lines(out, config))
    return files


def _write_lines(out: Path, config: ModelConfig) -> Path:
    rows = dressed.line_table_rows(config.chi, config.omega)
    return io.write_csv(out / "lines.csv",
                        ["label", "detuning_gamma", "kind", "multiplicity"], rows)


def _write_positions(out: Path, chi: float, omegas) -> Path:
    """Analytic line positions versus drive, for overlay rendering."""
    rows = []
    for om in omegas:
        lf = dressed.leapfrog_lines(chi, float(om))
        op = dressed.one_photon_lines(chi, float(om))
        rows.append((om, lf["I"], lf["II"], lf["III"], lf["IV"],
                     op["I"], abs(op["II"]), abs(op["III"])))
    return io.write_csv(
        out / "positions.csv",
        ["omega", "lf_I", "lf_II", "lf_III", "lf_IV", "op_I", "op_II", "op_III"],
        rows,
    )


def run_fig2a(out: Path, config: ModelConfig, points: int = 401,
              n_jobs: int = 1) -> list[Path]:
    """H-polarized two-photon correlation map of the bare dressed system."""
    grid = twophoton.default_grid(config.chi, config.omega, points)
    tpm = twophoton.g2_map(config, grid, grid, DETECTOR_LINEWIDTH, n_jobs=n_jobs)
    rows = [(w1, w2, tpm.values[j, i])
            for j, w2 in enumerate(tpm.w2) for i, w1 in enumerate(tpm.w1)]
    return [
        io.write_csv(out / "g2map.csv", ["w1", "w2", "g2"], rows),
        _write_lines(out, config),
    ]


def run_fig2b(out: Path, config: ModelConfig, points: int = 201,
              spectrum_points: int = 401) -> list[Path]:
    """Cavity spectrum and population as the cavity is scanned across lines."""
    span = twophoton.default_span(config.chi, config.omega)
    dc_grid = np.linspace(-span, span, points)
    w_grid = np.linspace(-span, span, spectrum_points)
    dis = None
    pop_rows, spec_rows = [], []
    for dc in dc_grid:
        mdl = build(replace(config, delta_c=float(dc)))
        if dis is None:
            dis = solver.dissipator(mdl)
        liouv = solver.liouvillian(mdl, dissipator_matrix=dis)
        rho = solver.steady_state(liouv)
        n_a, _, _ = solver.cavity_observables(liouv, rho, pairs=False)
        pop_rows.append((dc, n_a))
        spec = solver.emission_spectrum(liouv, rho, mdl.operators["a"].matrix, w_grid, "a")
        spec_rows.extend((dc, w, v) for w, v in zip(w_grid, spec.values))
    return [
        io.write_csv(out / "cavity_population.csv", ["delta_c", "n_a"], pop_rows),
        io.write_csv(out / "cavity_spectra.csv", ["delta_c", "w", "value"], spec_rows),
        _write_lines(out, config),
    ]


def run_fig3(out: Path, config: ModelConfig, omega_points: int = 25,
             w_points: int = 241, omega_range: tuple[float, float] = (10.0, 3162.0),
             n_jobs: int = 1) -> list[Path]:
    """Equal-frequency g2 diagonal versus drive strength."""
    omegas = np.geomspace(*omega_range, omega_points)
    span = twophoton.default_span(config.chi, float(omegas[-1]))
    w_grid = np.linspace(-span, span, w_points)
    rows = []
    for om in omegas:
        cfg = replace(config, omega=float(om))
        vals = twophoton.g2_diagonal(cfg, w_grid, DETECTOR_LINEWIDTH, n_jobs=n_jobs)
        rows.extend((om, w, v) for w, v in zip(w_grid, vals))
    return [
        io.write_csv(out / "g2diag_vs_omega.csv", ["omega", "w", "g2"], rows),
        _write_positions(out, config.chi, omegas),
        _write_lines(out, config),
    ]


@dataclass
class PurityPoint:
    """Monte Carlo purity estimate at one sweep point."""

    omega: float
    resonance: str
    window: float
    n_windows: int
    fit: CothermalFit


def mc_purity(config: ModelConfig, seed: int = 0, n_windows: int = 10_000,
              window: float | None = None, n_trajectories: int = 8,
              n_jobs: int = 1, n_bootstrap: int = 30) -> tuple[CothermalFit, float, int]:
    """Click-record purity of the cavity channel.

    The default window rule balances two artifacts: it must hold ~2 photons on
    average (so the pair structure is visible in the histogram) and must be
    long against the intra-pair emission span ~1/kappa, because each window
    boundary cuts pairs in two and the severed halves count as spurious
    singles (a constant-per-window contamination that decays as 1/window).
    window = max(2/rate, 40/kappa) keeps the boundary contamination at the
    percent level; estimates rise slowly toward the true pair fraction as
    the window grows further.
    """
    mdl = build(config)
    if window is None:
        liouv = solver.liouvillian(mdl)
        rho = solver.steady_state(liouv)
        n_a, _, _ = solver.cavity_observables(liouv, rho, pairs=False)
        rate = config.kappa * n_a
        window = max(2.0 / rate, 40.0 / config.kappa)
    per_traj = n_windows / n_trajectories
    tc = montecarlo.TrajectoryConfig(
        mdl, total_time=per_traj * window, n_trajectories=n_trajectories,
        seed=seed, recorded=("a",),
    )
    records = montecarlo.run(tc, n_jobs=n_jobs)
    dist = montecarlo.counting_distribution(records, window, "a")
    fit = fit_counting(dist, n_bootstrap=n_bootstrap, seed=seed, n_jobs=n_jobs)
    return fit, window, dist.n_windows


def run_fig4(out: Path, config: ModelConfig, omega_points: int = 60,
             omega_range: tuple[float, float] = (1e2, 1e4),
             with_purity: bool = False, purity_points: int = 5,
             seed: int = 0, n_windows: int = 10_000, n_jobs: int = 1) -> list[Path]:
    """Cavity observables on the four two-photon resonance tracks versus drive."""
    omegas = np.geomspace(*omega_range, omega_points)
    files = []
    dis = None
    for res in RESONANCES:
        rows = []
        for om in omegas:
            dc = dressed.leapfrog_lines(config.chi, float(om))[res]
            mdl = build(replace(config, omega=float(om), delta_c=dc))
            if dis is None:
                dis = solver.dissipator(mdl)
            liouv = solver.liouvillian(mdl, dissipator_matrix=dis)
            rho = solver.steady_state(liouv)
            n_a, g2, g2p = solver.cavity_observables(liouv, rho)
            rows.append((om, n_a, g2, g2p))
        files.append(io.write_csv(out / f"sweep_{res}.csv",
                                  ["omega", "n_a", "g2_0", "g2_2_0"], rows))
    files.append(_write_positions(out, config.chi, omegas))
    if with_purity:
        pur_omegas = np.geomspace(*omega_range, purity_points)
        rows = []
        for om in pur_omegas:
            for res in RESONANCES:
                dc = dressed.leapfrog_lines(config.chi, float(om))[res]
                cfg = replace(config, omega=float(om), delta_c=dc)
                fit, window, nw = mc_purity(cfg, seed=seed, n_windows=n_windows,
                                            n_jobs=n_jobs)
                rows.append((om, res, window, nw, fit.purity, fit.purity_thermal,
                             fit.purity_coherent, fit.spread["pi"]))
        files.append(io.write_csv(
            out / "purity.csv",
            ["omega", "resonance", "window", "n_windows", "pi", "pi_theta",
             "pi_lambda", "pi_spread"], rows,
        ))
    return files


def run_fig5(out: Path, config: ModelConfig, diag_points: int = 2401,
             corr_points: int = 25, corr_halfwidth: float = 120.0,
             taus: np.ndarray | None = None, theta_taus=(0.01, 1.0),
             n_jobs: int = 1) -> list[Path]:
    """Entanglement data: cross/auto diagonal, mode correlations, tomography."""
    files = []
    lf_iv = dressed.leapfrog_lines(config.chi, config.omega)["IV"]

    bare = replace(config, cavity="none", g=0.0, kappa=0.0, n_max=None)
    span = 1.1 * abs(dressed.one_photon_lines(config.chi, config.omega)["III"])
    w_grid = np.linspace(-span, span, diag_points)
    same = twophoton.g2_diagonal(bare, w_grid, DETECTOR_LINEWIDTH,
                                 channels=("sigma_H", "sigma_H"), n_jobs=n_jobs)
    cross = twophoton.g2_diagonal(bare, w_grid, DETECTOR_LINEWIDTH,
                                  channels=("sigma_H", "sigma_V"), n_jobs=n_jobs)
    files.append(io.write_csv(out / "g2diag_polarized.csv",
                              ["w", "g2_same", "g2_cross"],
                              zip(w_grid, same, cross)))

    dc_grid = np.linspace(lf_iv - corr_halfwidth, lf_iv + corr_halfwidth, corr_points)
    pc = twophoton.polarization_correlations(config, dc_grid, n_jobs=1)
    files.append(io.write_csv(
        out / "mode_correlations.csv",
        ["delta_c", "n_H", "n_V", "g2_HH", "g2_VV", "g2_HV", "csi_ratio"],
        zip(pc.delta_c, pc.n_h, pc.n_v, pc.g2_hh, pc.g2_vv, pc.g2_hv, pc.csi_ratio),
    ))

    from . import tomography
    mdl = build(replace(config, delta_c=lf_iv))
    liouv = solver.liouvillian(mdl)
    rho = solver.steady_state(liouv)
    if taus is None:
        taus = np.geomspace(2e-3, 2.0, 25)
    curve = tomography.metrics_vs_tau(liouv, rho, taus)
    files.append(io.write_csv(
        out / "tomography.csv", ["tau", "concurrence", "fidelity", "purity", "S_L"],
        zip(curve.tau, curve.concurrence, curve.fidelity, curve.purity,
            curve.linear_entropy),
    ))
    builder = tomography.ThetaBuilder(liouv, rho)
    for tau in theta_taus:
        th = builder.theta(float(tau)).normalize()
        files.append(io.write_json(out / f"theta_tau{tau:g}.json", {
            "tau": tau,
            "basis": ["HH", "HV", "VH", "VV"],
            "re": th.matrix.real.tolist(),
            "im": th.matrix.imag.tolist(),
        }))
    files.append(_write_lines(out, config))
    return files


_RUNNERS = {
    "fig1c": run_fig1c,
    "fig2a": run_fig2a,
    "fig2b": run_fig2b,
    "fig3": run_fig3,
    "fig4": run_fig4,
    "fig5": run_fig5,
}


def run_scenario(name: str, out_dir, overrides: dict | None = None,
                 seed: int = 0, **kwargs) -> list[Path]:
    """Run a named preset, writing its data files plus a manifest."""
    if name not in PRESETS:
        raise KeyError(f"unknown scenario {name!r}; choose from {sorted(PRESETS)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = PRESETS[name]
    if overrides:
        config = replace(config, **overrides)
    if name == "fig4":
        kwargs.setdefault("seed", seed)
    files = _RUNNERS[name](out, config, **kwargs)
    io.write_manifest(out, config, seed, files, extra={"scenario": name})
    return files
