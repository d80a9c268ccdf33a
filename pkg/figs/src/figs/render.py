"""Per-figure renderers: scenario data tables in, a single image out.

Analytic line positions are always read from the scenario's lines/positions
CSVs and drawn as overlays; no physics is recomputed here.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import colors
from .spec import FigureSpec, SchemaError, read_json, read_lines_table, read_table


def render(spec: FigureSpec) -> Path:
    """Dispatch to the figure's renderer and write the image."""
    if spec.name not in RENDERERS:
        raise SchemaError(f"unknown figure {spec.name!r}; choose from {sorted(RENDERERS)}")
    fig = RENDERERS[spec.name](spec)
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=spec.options.get("dpi", 160), bbox_inches="tight")
    plt.close(fig)
    return out


def _overlay_vertical_lines(ax, lines, kind, **kw):
    for _, det in lines[kind]:
        ax.axvline(det, **kw)


def render_fig1c(spec: FigureSpec):
    d = spec.input_dir
    sh = read_table(d / "spectrum_H.csv", ["detuning", "value"])
    sv = read_table(d / "spectrum_V.csv", ["detuning", "value"])
    lines = read_lines_table(d / "lines.csv")
    fig, ax = plt.subplots(figsize=(6.0, 3.4))
    ax.plot(sv["detuning"], sv["value"], "--", color=colors.SAME_POL, lw=1.0,
            label="V polarization")
    ax.plot(sh["detuning"], sh["value"], "-", color=colors.CROSS_POL, lw=1.2,
            label="H polarization")
    _overlay_vertical_lines(ax, lines, "one_photon", color="0.6", lw=0.6, zorder=0)
    ax.set_yscale("log")
    top = max(sh["value"].max(), sv["value"].max())
    ax.set_ylim(top * 1e-6, top * 3)
    ax.set_xlabel("detuning from drive (units of exciton decay)")
    ax.set_ylabel("emission spectrum")
    ax.legend(loc="upper right", fontsize=8)
    return fig


def render_fig2a(spec: FigureSpec):
    d = spec.input_dir
    m = read_table(d / "g2map.csv", ["w1", "w2", "g2"])
    lines = read_lines_table(d / "lines.csv")
    w1 = np.unique(m["w1"])
    w2 = np.unique(m["w2"])
    grid = m["g2"].reshape(len(w2), len(w1))
    fig, ax = plt.subplots(figsize=(5.4, 4.6))
    mesh = ax.pcolormesh(w1, w2, colors.log_g2(grid), cmap=colors.CMAP,
                         norm=colors.g2_norm(grid), shading="nearest")
    for _, det in lines["one_photon"]:
        ax.axvline(det, color="0.4", lw=0.5)
        ax.axhline(det, color="0.4", lw=0.5)
    for _, det in lines["two_photon"]:
        # pairs obey w1 + w2 = 2 * per-photon detuning
        ax.plot(w1, 2 * det - w1, color="0.2", lw=0.5, ls=":")
    ax.set_xlim(w1.min(), w1.max())
    ax.set_ylim(w2.min(), w2.max())
    ax.set_xlabel("first photon detuning")
    ax.set_ylabel("second photon detuning")
    fig.colorbar(mesh, ax=ax, label="log10 g2 (white = uncorrelated)")
    return fig


def render_fig2b(spec: FigureSpec):
    d = spec.input_dir
    spectra = read_table(d / "cavity_spectra.csv", ["delta_c", "w", "value"])
    pop = read_table(d / "cavity_population.csv", ["delta_c", "n_a"])
    lines = read_lines_table(d / "lines.csv")
    dc = np.unique(spectra["delta_c"])
    w = np.unique(spectra["w"])
    grid = spectra["value"].reshape(len(dc), len(w))
    fig, (ax, ax2) = plt.subplots(
        1, 2, figsize=(7.2, 4.2), sharey=True,
        gridspec_kw={"width_ratios": [3, 1], "wspace": 0.05},
    )
    mesh = ax.pcolormesh(w, dc, np.log10(np.clip(grid, 1e-12, None)),
                         cmap="magma", shading="nearest")
    _overlay_vertical_lines(ax, lines, "one_photon", color="w", lw=0.4, alpha=0.6)
    ax.set_xlabel("emission detuning")
    ax.set_ylabel("cavity detuning")
    fig.colorbar(mesh, ax=ax, label="log10 cavity spectrum", location="left",
                 pad=0.18)
    ax2.plot(pop["n_a"], pop["delta_c"], lw=1.0, color="k")
    for _, det in lines["two_photon"]:
        ax2.axhline(det, color="0.6", lw=0.5, ls=":")
    ax2.set_xscale("log")
    ax2.set_xlabel("cavity population")
    return fig


def render_fig3(spec: FigureSpec):
    d = spec.input_dir
    m = read_table(d / "g2diag_vs_omega.csv", ["omega", "w", "g2"])
    pos = read_table(d / "positions.csv",
                     ["omega", "lf_I", "lf_II", "lf_III", "lf_IV"])
    omegas = np.unique(m["omega"])
    w = np.unique(m["w"])
    grid = m["g2"].reshape(len(omegas), len(w))
    fig, (ax_cut, ax) = plt.subplots(
        2, 1, figsize=(5.6, 6.0), sharex=True,
        gridspec_kw={"height_ratios": [1, 3], "hspace": 0.08},
    )
    top = grid[-1]
    ax_cut.plot(w, top, lw=1.0, color="k")
    ax_cut.set_yscale("log")
    ax_cut.set_ylabel("g2 at top drive")
    mesh = ax.pcolormesh(w, omegas, colors.log_g2(grid), cmap=colors.CMAP,
                         norm=colors.g2_norm(grid), shading="nearest")
    for key in ("lf_I", "lf_II", "lf_III", "lf_IV"):
        ax.plot(pos[key], pos["omega"], color="0.2", lw=0.6, ls=":")
        if key != "lf_I":
            ax.plot(-pos[key], pos["omega"], color="0.2", lw=0.6, ls=":")
    ax.set_yscale("log")
    ax.set_xlim(w.min(), w.max())
    ax.set_ylim(omegas.min(), omegas.max())
    ax.set_xlabel("photon detuning (equal-frequency diagonal)")
    ax.set_ylabel("drive amplitude")
    fig.colorbar(mesh, ax=[ax_cut, ax], label="log10 g2")
    return fig


def render_fig4(spec: FigureSpec):
    d = spec.input_dir
    sweeps = {res: read_table(d / f"sweep_{res}.csv",
                              ["omega", "n_a", "g2_0", "g2_2_0"])
              for res in ("I", "II", "III", "IV")}
    pos = read_table(d / "positions.csv",
                     ["omega", "lf_I", "lf_II", "lf_III", "lf_IV",
                      "op_I", "op_II", "op_III"])
    purity_path = d / "purity.csv"
    have_purity = purity_path.exists()
    n_panels = 5 if have_purity else 4
    fig, axes = plt.subplots(n_panels, 1, figsize=(4.6, 2.1 * n_panels),
                             sharex=True)
    ax_na, ax_g2, ax_g22 = axes[0], axes[1], axes[2]
    for res, table in sweeps.items():
        c = colors.RESONANCE_COLORS[res]
        ax_na.plot(table["omega"], table["n_a"], color=c, lw=1.2, label=res)
        ax_g2.plot(table["omega"], table["g2_0"], color=c, lw=1.2)
        ax_g22.plot(table["omega"], table["g2_2_0"], color=c, lw=1.2)
    ax_na.set_yscale("log")
    ax_na.set_ylabel("cavity population")
    ax_na.legend(ncol=4, fontsize=7, loc="lower right")
    ax_g2.set_yscale("log")
    ax_g2.set_ylabel("g2(0)")
    ax_g22.set_yscale("log")
    ax_g22.axhline(1.0, color="0.5", lw=0.6)
    ax_g22.set_ylabel("pair g2(0)")
    if have_purity:
        ax_pi = axes[3]
        pur = read_table(purity_path, ["omega", "resonance", "pi"])
        for res in ("I", "II", "III", "IV"):
            mask = pur["resonance"] == res
            if np.any(mask):
                ax_pi.plot(pur["omega"][mask], pur["pi"][mask], "o-",
                           color=colors.RESONANCE_COLORS[res], lw=1.0, ms=3)
        ax_pi.set_ylim(0, 1.05)
        ax_pi.set_ylabel("pair purity")
    ax_pos = axes[-1]
    for key in ("lf_I", "lf_II", "lf_III", "lf_IV"):
        ax_pos.plot(pos["omega"], pos[key],
                    color=colors.RESONANCE_COLORS[key.split("_")[1]], lw=1.2)
    for key in ("op_I", "op_II", "op_III"):
        ax_pos.plot(pos["omega"], pos[key], color="0.4", lw=0.8, ls="--")
    ax_pos.set_xscale("log")
    ax_pos.set_ylabel("line positions")
    ax_pos.set_xlabel("drive amplitude")
    return fig


def render_fig5(spec: FigureSpec):
    d = spec.input_dir
    diag = read_table(d / "g2diag_polarized.csv", ["w", "g2_same", "g2_cross"])
    modes = read_table(d / "mode_correlations.csv",
                       ["delta_c", "g2_HH", "g2_VV", "g2_HV", "csi_ratio"])
    tomo = read_table(d / "tomography.csv",
                      ["tau", "concurrence", "fidelity", "purity", "S_L"])
    thetas = sorted(Path(d).glob("theta_tau*.json"))
    if not thetas:
        raise SchemaError(f"{d}: no theta_tau*.json matrices found")
    fig, axes = plt.subplots(2, 2, figsize=(8.4, 6.4))
    ax = axes[0, 0]
    ax.plot(diag["w"], diag["g2_same"], color=colors.SAME_POL, lw=1.0,
            label="same polarization")
    ax.plot(diag["w"], diag["g2_cross"], color=colors.CROSS_POL, lw=1.0,
            label="opposed polarization")
    ax.set_yscale("log")
    ax.set_xlabel("photon detuning (diagonal)")
    ax.set_ylabel("g2")
    ax.legend(fontsize=7)

    ax = axes[0, 1]
    ax.plot(modes["delta_c"], modes["g2_HH"], color=colors.SAME_POL, lw=1.2,
            label="auto HH")
    ax.plot(modes["delta_c"], modes["g2_HV"], color=colors.CROSS_POL, lw=1.2,
            label="cross HV")
    ax.plot(modes["delta_c"], modes["csi_ratio"], color="0.3", lw=0.9, ls=":",
            label="Cauchy-Schwarz ratio")
    ax.axhline(1.0, color="0.7", lw=0.6)
    ax.set_yscale("log")
    ax.set_xlabel("cavity detuning")
    ax.legend(fontsize=7)

    ax = axes[1, 0]
    ax.plot(tomo["tau"], tomo["concurrence"], lw=1.2, label="concurrence")
    ax.plot(tomo["tau"], tomo["purity"], lw=1.0, label="purity")
    ax.plot(tomo["tau"], tomo["fidelity"], lw=1.0, label="Bell fidelity")
    ax.set_xscale("log")
    ax.set_ylim(0, 1.05)
    ax.set_xlabel("measurement window")
    ax.legend(fontsize=7)

    ax = axes[1, 1]
    payload = read_json(thetas[0])
    matrix = np.asarray(payload["re"])
    im = ax.imshow(matrix, cmap=colors.CMAP, vmin=-0.5, vmax=0.5)
    labels = payload.get("basis", ["HH", "HV", "VH", "VV"])
    ax.set_xticks(range(4), labels)
    ax.set_yticks(range(4), labels)
    for i in range(4):
        for j in range(4):
            ax.text(j, i, f"{matrix[i, j]:.2f}", ha="center", va="center",
                    fontsize=7)
    ax.set_title(f"Re theta, window {payload['tau']:g}", fontsize=9)
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    return fig


def render_figS1(spec: FigureSpec):
    d = spec.input_dir
    counts = read_table(d / spec.options.get("counts", "counts_a.csv"), ["n", "p"])
    fig, ax = plt.subplots(figsize=(4.6, 3.2))
    ax.bar(counts["n"], counts["p"], color="0.75", label="measured")
    for stem, color in (("purity", colors.CROSS_POL),
                        ("purity_coherent_only", colors.SAME_POL)):
        path = d / f"{stem}_model_pmf.csv"
        if path.exists():
            model = read_table(path, ["n", "p"])
            ax.plot(model["n"], model["p"], "o-", ms=3, lw=1.0, color=color,
                    label=stem.replace("_", " "))
    ax.set_yscale("log")
    ax.set_ylim(bottom=max(counts["p"][counts["p"] > 0].min() * 0.5, 1e-7))
    ax.set_xlabel("photons per window")
    ax.set_ylabel("probability")
    ax.legend(fontsize=7)
    return fig


def render_figS2(spec: FigureSpec):
    d = spec.input_dir
    pur = read_table(d / "purity.csv",
                     ["omega", "resonance", "pi", "pi_theta", "pi_lambda"])
    mask = pur["resonance"] == spec.options.get("resonance", "I")
    if not np.any(mask):
        raise SchemaError(f"{d / 'purity.csv'}: no rows for the requested resonance")
    fig, ax = plt.subplots(figsize=(4.6, 3.2))
    ax.plot(pur["omega"][mask], pur["pi"][mask], "o-", color="k", lw=1.2,
            label="purity")
    ax.plot(pur["omega"][mask], pur["pi_theta"][mask], "s--", ms=3,
            color=colors.CROSS_POL, label="thermal part")
    ax.plot(pur["omega"][mask], pur["pi_lambda"][mask], "d--", ms=3,
            color=colors.SAME_POL, label="coherent part")
    ax.set_xscale("log")
    ax.set_ylim(0, 1.05)
    ax.set_xlabel("drive amplitude")
    ax.set_ylabel("pair purity")
    ax.legend(fontsize=7)
    return fig


def render_figS3(spec: FigureSpec):
    d = spec.input_dir
    bars = []
    for stem in ("purity", "purity_coherent_only"):
        path = d / f"{stem}.json"
        if path.exists():
            bars.append((stem.replace("_", " "), read_json(path)["residual"]))
    if len(bars) < 2:
        raise SchemaError(
            f"{d}: need both purity.json and purity_coherent_only.json for the "
            "ansatz comparison")
    fig, ax = plt.subplots(figsize=(3.6, 3.0))
    names, values = zip(*bars)
    ax.bar(names, values, color=[colors.CROSS_POL, colors.SAME_POL])
    ax.set_yscale("log")
    ax.set_ylabel("fit residual (sum of squared errors)")
    for i, v in enumerate(values):
        ax.text(i, v, f"{v:.2e}", ha="center", va="bottom", fontsize=7)
    return fig


RENDERERS = {
    "fig1c": render_fig1c,
    "fig2a": render_fig2a,
    "fig2b": render_fig2b,
    "fig3": render_fig3,
    "fig4": render_fig4,
    "fig5": render_fig5,
    "figS1": render_figS1,
    "figS2": render_figS2,
    "figS3": render_figS3,
}
