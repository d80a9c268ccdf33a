"""Command line interface.

All energies are in units of the exciton decay rate and times in its
inverse.  Every data-producing subcommand writes CSV tables plus a JSON
sidecar of the resolved configuration, so a run can be reproduced from its
output directory alone.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import dressed, io, montecarlo, scenarios, solver, tomography, twophoton
from .counting import fit_counting
from .model import ModelConfig, build
from .montecarlo import CountingDistribution


_GLOBAL_DEFAULTS = {"config": None, "out": Path("out"), "seed": 0, "threads": 1}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in _GLOBAL_DEFAULTS.items():
        if not hasattr(args, name):
            setattr(args, name, default)
    if args.command is None:
        parser.print_help()
        return 1
    return args.func(args)


def build_parser() -> argparse.ArgumentParser:
    # global flags live in a parent parser so they parse on either side of
    # the subcommand; SUPPRESS keeps unset subcommand copies from clobbering
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=argparse.SUPPRESS,
                        help="ModelConfig JSON file")
    common.add_argument("--out", type=Path, default=argparse.SUPPRESS,
                        help="output directory")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="RNG seed")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="parallel workers for grid/trajectory sweeps")

    parser = argparse.ArgumentParser(
        prog="biexciton",
        description="Photon-pair physics of a coherently driven biexciton-cavity system",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("lines", parents=[common],
                       help="one- and two-photon line table as CSV")
    _model_flags(p)
    p.set_defaults(func=cmd_lines)

    p = sub.add_parser("spectrum", parents=[common],
                       help="steady-state emission spectrum")
    _model_flags(p)
    p.add_argument("--channel", default="sigma_H",
                   choices=["sigma_H", "sigma_V", "a", "a_H", "a_V"])
    p.add_argument("--step", type=float, default=0.25, help="grid step (gamma)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("g2map", parents=[common],
                       help="frequency-resolved two-photon correlations")
    _model_flags(p)
    p.add_argument("--gamma-det", type=float, default=10.0, help="detector linewidth")
    p.add_argument("--points", type=int, default=401)
    p.add_argument("--diagonal", action="store_true", help="equal-frequency cut only")
    p.add_argument("--channels", default="sigma_H,sigma_H",
                   help="comma-separated monitored operators for the two detectors")
    p.set_defaults(func=cmd_g2map)

    p = sub.add_parser("sweep", parents=[common],
                       help="cavity observables on the resonance tracks")
    _model_flags(p)
    p.add_argument("--omega-min", type=float, default=1e2)
    p.add_argument("--omega-max", type=float, default=1e4)
    p.add_argument("--points", type=int, default=60)
    p.add_argument("--with-purity", action="store_true",
                   help="add Monte Carlo purity fits (slow)")
    p.add_argument("--windows", type=int, default=10_000,
                   help="counting windows per purity point")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("mc", parents=[common],
                       help="quantum-jump click records and counting histograms")
    _model_flags(p)
    p.add_argument("--total-time", type=float, default=1000.0,
                   help="recorded span per trajectory (1/gamma)")
    p.add_argument("--T", type=float, default=None, help="counting window (1/gamma)")
    p.add_argument("--ntraj", type=int, default=8)
    p.add_argument("--channels", default="a", help="comma-separated recorded channels")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("purity", parents=[common],
                       help="cothermal fit of a counting histogram CSV")
    p.add_argument("counts", type=Path, help="CSV with columns n,p")
    p.add_argument("--windows", type=int, default=10_000,
                   help="window count behind the histogram (for the bootstrap)")
    p.add_argument("--window", type=float, default=1.0, help="window length (1/gamma)")
    p.add_argument("--bootstrap", type=int, default=50)
    p.add_argument("--coherent-only", action="store_true",
                   help="pin the thermal component to zero (ansatz comparison)")
    p.set_defaults(func=cmd_purity)

    p = sub.add_parser("tomo", parents=[common],
                       help="pair tomography metrics versus window")
    _model_flags(p)
    p.add_argument("--tau-min", type=float, default=2e-3)
    p.add_argument("--tau-max", type=float, default=2.0)
    p.add_argument("--tau-points", type=int, default=25)
    p.add_argument("--theta-tau", type=float, action="append", default=None,
                   help="emit the full 4x4 matrix at this window (repeatable)")
    p.set_defaults(func=cmd_tomo)

    p = sub.add_parser("scenario", parents=[common],
                       help="run a named preset end to end")
    p.add_argument("name", choices=sorted(scenarios.PRESETS))
    p.add_argument("--points", type=int, default=None, help="override grid size")
    p.add_argument("--omega-points", type=int, default=None,
                   help="override drive-sweep resolution (fig3, fig4)")
    p.add_argument("--with-purity", action="store_true")
    p.add_argument("--windows", type=int, default=10_000)
    p.set_defaults(func=cmd_scenario)
    return parser


def _model_flags(p: argparse.ArgumentParser):
    p.add_argument("--chi", type=float, default=None)
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--g", type=float, default=None)
    p.add_argument("--delta-x", type=float, default=None)
    p.add_argument("--delta-c", type=float, default=None)
    p.add_argument("--drive", choices=["linearV", "circular"], default=None)
    p.add_argument("--cavity", choices=["none", "singleH", "dualHV"], default=None)
    p.add_argument("--n-max", type=int, default=None)


_FLAG_FIELDS = ("chi", "omega", "kappa", "g", "delta_x", "delta_c", "drive",
                "cavity", "n_max")


def resolve_config(args) -> ModelConfig:
    """Merge --config file with explicit flags; flags win."""
    base = {}
    if args.config is not None:
        base = ModelConfig.from_json(args.config).to_dict()
        base.pop("sensors", None)
    for name in _FLAG_FIELDS:
        val = getattr(args, name, None)
        if val is not None:
            base[name] = val
    if base.get("chi") is None:
        raise SystemExit("a model needs at least --chi (or a --config file)")
    base.setdefault("omega", 0.0)
    return ModelConfig(**{k: v for k, v in base.items() if v is not None})


def _sidecar(args, config: ModelConfig, files):
    config.to_json(args.out / "config.json")
    io.write_manifest(args.out, config, args.seed, list(files))


def cmd_lines(args) -> int:
    cfg = resolve_config(args)
    rows = dressed.line_table_rows(cfg.chi, cfg.omega)
    print("label,detuning_gamma,kind,multiplicity")
    for label, det, kind, mult in rows:
        print(f"{label},{det!r},{kind},{mult}")
    return 0


def cmd_spectrum(args) -> int:
    cfg = resolve_config(args)
    mdl = build(cfg)
    if args.channel not in mdl.operators:
        raise SystemExit(f"channel {args.channel} absent from this model")
    liouv = solver.liouvillian(mdl)
    rho = solver.steady_state(liouv)
    grid = scenarios.spectrum_grid(cfg.chi, cfg.omega, args.step)
    spec = solver.emission_spectrum(liouv, rho, mdl.operators[args.channel].matrix,
                                    grid, args.channel)
    f = io.write_csv(args.out / f"spectrum_{args.channel}.csv",
                     ["detuning", "value"], zip(spec.detuning, spec.values))
    _sidecar(args, cfg, [f])
    print(f"wrote {f}")
    return 0


def cmd_g2map(args) -> int:
    cfg = resolve_config(args)
    channels = tuple(args.channels.split(","))
    if len(channels) != 2:
        raise SystemExit("--channels needs exactly two comma-separated names")
    grid = twophoton.default_grid(cfg.chi, cfg.omega, args.points)
    if args.diagonal:
        vals = twophoton.g2_diagonal(cfg, grid, args.gamma_det, channels,
                                     n_jobs=args.threads)
        f = io.write_csv(args.out / "g2diag.csv", ["w", "g2"], zip(grid, vals))
    else:
        tpm = twophoton.g2_map(cfg, grid, grid, args.gamma_det, channels,
                               n_jobs=args.threads)
        rows = [(w1, w2, tpm.values[j, i])
                for j, w2 in enumerate(tpm.w2) for i, w1 in enumerate(tpm.w1)]
        f = io.write_csv(args.out / "g2map.csv", ["w1", "w2", "g2"], rows)
    _sidecar(args, cfg, [f])
    print(f"wrote {f}")
    return 0


def cmd_sweep(args) -> int:
    cfg = resolve_config(args)
    if cfg.cavity == "none":
        cfg = ModelConfig(**{**cfg.to_dict(), "cavity": "singleH",
                             "n_max": cfg.n_max or 5})
    files = scenarios.run_fig4(
        args.out, cfg, omega_points=args.points,
        omega_range=(args.omega_min, args.omega_max),
        with_purity=args.with_purity, seed=args.seed,
        n_windows=args.windows, n_jobs=args.threads,
    )
    _sidecar(args, cfg, files)
    print("\n".join(f"wrote {f}" for f in files))
    return 0


def cmd_mc(args) -> int:
    cfg = resolve_config(args)
    mdl = build(cfg)
    recorded = tuple(args.channels.split(","))
    tc = montecarlo.TrajectoryConfig(
        mdl, total_time=args.total_time, n_trajectories=args.ntraj,
        seed=args.seed, recorded=recorded,
    )
    records = montecarlo.run(tc, n_jobs=args.threads)
    files = [
        io.write_csv(args.out / f"clicks_{i:03d}.csv", ["t", "channel"], list(rec))
        for i, rec in enumerate(records)
    ]
    if args.T is not None:
        for ch in recorded:
            dist = montecarlo.counting_distribution(records, args.T, ch)
            files.append(io.write_csv(
                args.out / f"counts_{ch}.csv", ["n", "p"],
                enumerate(dist.p),
            ))
    _sidecar(args, cfg, files)
    print("\n".join(f"wrote {f}" for f in files))
    return 0


def cmd_purity(args) -> int:
    from .counting import cothermal_pmf

    _, data = io.read_csv(args.counts)
    p = data[:, 1]
    dist = CountingDistribution(args.window, p / p.sum(), args.windows)
    fit = fit_counting(dist, n_bootstrap=args.bootstrap, seed=args.seed,
                       thermal=not args.coherent_only)
    stem = "purity_coherent_only" if args.coherent_only else "purity"
    out = io.write_json(args.out / f"{stem}.json", fit.to_dict())
    model_pmf = cothermal_pmf(fit.params, p.size - 1, coverage_tol=np.inf)
    fcsv = io.write_csv(args.out / f"{stem}_model_pmf.csv", ["n", "p"],
                        enumerate(model_pmf))
    print(f"wrote {out}")
    print(f"wrote {fcsv}")
    return 0


def cmd_tomo(args) -> int:
    cfg = resolve_config(args)
    if cfg.cavity != "dualHV":
        raise SystemExit("tomography needs --cavity dualHV (two polarized modes)")
    mdl = build(cfg)
    liouv = solver.liouvillian(mdl)
    rho = solver.steady_state(liouv)
    taus = np.geomspace(args.tau_min, args.tau_max, args.tau_points)
    curve = tomography.metrics_vs_tau(liouv, rho, taus)
    files = [io.write_csv(
        args.out / "tomography.csv",
        ["tau", "concurrence", "fidelity", "purity", "S_L"],
        zip(curve.tau, curve.concurrence, curve.fidelity, curve.purity,
            curve.linear_entropy),
    )]
    builder = tomography.ThetaBuilder(liouv, rho)
    for tau in (args.theta_tau or []):
        th = builder.theta(tau).normalize()
        files.append(io.write_json(args.out / f"theta_tau{tau:g}.json", {
            "tau": tau,
            "basis": ["HH", "HV", "VH", "VV"],
            "re": th.matrix.real.tolist(),
            "im": th.matrix.imag.tolist(),
        }))
    _sidecar(args, cfg, files)
    print("\n".join(f"wrote {f}" for f in files))
    return 0


def cmd_scenario(args) -> int:
    kwargs = {}
    if args.points is not None:
        key = {"fig1c": None, "fig2a": "points", "fig2b": "points",
               "fig3": "w_points", "fig4": None, "fig5": "corr_points"}
        if key[args.name]:
            kwargs[key[args.name]] = args.points
    if args.omega_points is not None and args.name in ("fig3", "fig4"):
        kwargs["omega_points"] = args.omega_points
    if args.name == "fig4":
        kwargs["with_purity"] = args.with_purity
        kwargs["n_windows"] = args.windows
    if args.name in ("fig2a", "fig3", "fig4", "fig5"):
        kwargs["n_jobs"] = args.threads
    files = scenarios.run_scenario(args.name, args.out, seed=args.seed, **kwargs)
    print("\n".join(f"wrote {f}" for f in files))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
