"""Figure regeneration from the simulator CLI's CSV outputs.

Each renderer consumes only files produced by the `rydsense` subcommands
(the CSV formats are the integration contract; nothing here calls the
simulator directly).  Figure ids: fig2a, fig2b, fig2dyn, fig3, figA1,
figA2, figA3, figA4.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


class MissingColumns(ValueError):
    """Input CSV lacks the columns the renderer needs."""


def read_csv(path) -> tuple[dict, dict[str, np.ndarray]]:
    """Parse a simulator CSV: '#' metadata plus named float columns."""
    meta: dict[str, str] = {}
    header: list[str] = []
    rows: list[list[float]] = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if "=" in body:
                key, _, value = body.partition("=")
                meta[key.strip()] = value.strip()
            continue
        if not header:
            header = line.split(",")
            continue
        rows.append([float(v) for v in line.split(",")])
    if not header or not rows:
        raise MissingColumns(f"{path}: no data")
    data = np.asarray(rows)
    return meta, {name: data[:, k] for k, name in enumerate(header)}


def _require(columns: dict, names: list[str], path) -> None:
    missing = [n for n in names if n not in columns]
    if missing:
        raise MissingColumns(f"{path}: missing columns {missing}")


def _save(fig, out_path) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=180, bbox_inches="tight")
    plt.close(fig)
    return out_path


def render_fig2dyn(traj_csvs: list, out_path) -> Path:
    """Basis-state fidelities over one Rabi period, one panel per field."""
    fig, axes = plt.subplots(
        1, len(traj_csvs), figsize=(4.2 * len(traj_csvs), 3.4), sharey=True
    )
    axes = np.atleast_1d(axes)
    for ax, path in zip(axes, traj_csvs):
        meta, cols = read_csv(path)
        _require(cols, ["t_us"], path)
        t = cols["t_us"]
        tau = t[-1]
        for name, values in cols.items():
            if not name.startswith("F_"):
                continue
            label = name[2:]
            emphasize = set(label) == {"1"} or set(label) == {"0"}
            ax.plot(
                t / tau,
                values,
                lw=1.8 if emphasize else 0.9,
                label=f"|{label}>" if emphasize else None,
            )
        ax.set_xlabel("t / tau")
        ax.set_title(Path(path).stem, fontsize=9)
        ax.set_ylim(-0.02, 1.02)
        ax.legend(fontsize=8, loc="center right")
    axes[0].set_ylabel("fidelity F")
    return _save(fig, out_path)


def render_fig2a(fmax_csv, out_path) -> Path:
    """F_max versus separation, one line per field value."""
    _, cols = read_csv(fmax_csv)
    _require(cols, ["R_um", "E_mVcm", "f_max"], fmax_csv)
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    for e_val in sorted(set(cols["E_mVcm"])):
        mask = cols["E_mVcm"] == e_val
        order = np.argsort(cols["R_um"][mask])
        ax.plot(
            cols["R_um"][mask][order],
            cols["f_max"][mask][order],
            marker="o",
            ms=3,
            label=f"E = {e_val:g} mV/cm",
        )
    ax.set_xlabel("R (um)")
    ax.set_ylabel("F_max")
    ax.legend(fontsize=7)
    return _save(fig, out_path)


def render_fig2b(curves_csv, out_path) -> Path:
    """F_max versus field, one line per row separation."""
    _, cols = read_csv(curves_csv)
    _require(cols, ["R_um", "E_mVcm", "f_max"], curves_csv)
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    for r_val in sorted(set(cols["R_um"])):
        mask = cols["R_um"] == r_val
        order = np.argsort(cols["E_mVcm"][mask])
        ax.plot(
            cols["E_mVcm"][mask][order],
            cols["f_max"][mask][order],
            label=f"R = {r_val:g} um",
        )
    ax.set_xlabel("E (mV/cm)")
    ax.set_ylabel("F_max")
    ax.legend(fontsize=8)
    return _save(fig, out_path)


def _correlator_panel(ax_field, ax_matrix, corr_csv, field_csv, e_res) -> None:
    _, corr = read_csv(corr_csv)
    _require(corr, ["i", "j", "value"], corr_csv)
    _, field = read_csv(field_csv)
    _require(field, ["i", "E_mVcm"], field_csv)
    n = int(corr["i"].max())
    matrix = np.zeros((n, n))
    for i_val, j_val, value in zip(corr["i"], corr["j"], corr["value"]):
        matrix[int(i_val) - 1, int(j_val) - 1] = value
    ax_field.plot(field["i"], field["E_mVcm"] / e_res, marker="o", ms=2.5)
    ax_field.axhline(1.0, color="gray", lw=0.6, ls="--")
    ax_field.set_ylabel("E / E_res", fontsize=8)
    ax_field.set_xlim(0.5, n + 0.5)
    image = ax_matrix.imshow(
        matrix, origin="lower", extent=(0.5, n + 0.5, 0.5, n + 0.5),
        vmin=0.0, vmax=1.0, cmap="viridis",
    )
    ax_matrix.set_xlabel("atom i")
    ax_matrix.set_ylabel("atom j")
    plt.colorbar(image, ax=ax_matrix, label="<n_i n_j>", fraction=0.046)


def render_fig3(panels: list[tuple], e_res: float, out_path) -> Path:
    """Field profile on top, correlator heatmap below, one column per panel."""
    n_panels = len(panels)
    fig, axes = plt.subplots(
        2, n_panels,
        figsize=(4.0 * n_panels, 5.2),
        gridspec_kw={"height_ratios": [1, 3]},
        squeeze=False,
    )
    for col, (corr_csv, field_csv) in enumerate(panels):
        _correlator_panel(axes[0][col], axes[1][col], corr_csv, field_csv, e_res)
    return _save(fig, out_path)


def render_figA1(coeffs_csv, out_path, separation_um: float = 8.1) -> Path:
    """Pair energies versus field: uncoupled defect branches and coupled
    eigenvalues at a fixed separation."""
    _, cols = read_csv(coeffs_csv)
    _require(cols, ["E_mVcm", "delta_MHz", "C3_MHz_um3"], coeffs_csv)
    e_grid = cols["E_mVcm"]
    delta = cols["delta_MHz"]
    coupling = cols["C3_MHz_um3"] / separation_um**3
    root = np.sqrt(delta**2 + 4.0 * coupling**2)
    fig, ax = plt.subplots(figsize=(4.8, 3.6))
    ax.plot(e_grid, delta, lw=1.0, label="doubly excited pair (uncoupled)")
    ax.axhline(0.0, color="C1", lw=1.0, label="coupled-pair asymptote")
    ax.plot(e_grid, 0.5 * (delta + root), "k-", lw=1.4, label="coupled")
    ax.plot(e_grid, 0.5 * (delta - root), "k-", lw=1.4)
    ax.set_xlabel("E (mV/cm)")
    ax.set_ylabel("pair energy / h (MHz)")
    ax.legend(fontsize=8)
    ax.set_title(f"R = {separation_um} um", fontsize=9)
    return _save(fig, out_path)


def render_figA2(coeffs_csv, out_path) -> Path:
    """Effective interaction versus separation plus the two radii versus field."""
    meta, cols = read_csv(coeffs_csv)
    _require(cols, ["E_mVcm", "delta_MHz", "C3_MHz_um3", "Rc_um", "Rb_um"], coeffs_csv)
    fig, (ax_v, ax_r) = plt.subplots(1, 2, figsize=(9.0, 3.4))

    r_grid = np.geomspace(1.0, 70.0, 300)
    for e_target in (0.0, 28.2, 29.0, 34.4):
        k = int(np.argmin(np.abs(cols["E_mVcm"] - e_target)))
        delta = cols["delta_MHz"][k]
        c3 = cols["C3_MHz_um3"][k]
        coupling = c3 / r_grid**3
        v_eff = 0.5 * (abs(delta) - np.hypot(delta, 2.0 * coupling))
        ax_v.loglog(r_grid, np.abs(v_eff), label=f"E = {e_target:g} mV/cm")
        if np.isfinite(cols["Rc_um"][k]):
            ax_v.axvline(cols["Rc_um"][k], color="gray", lw=0.5, ls=":")
    ax_v.set_xlabel("R (um)")
    ax_v.set_ylabel("|V| / h (MHz)")
    ax_v.legend(fontsize=7)

    ax_r.plot(cols["E_mVcm"], cols["Rc_um"], label="crossover radius")
    ax_r.plot(cols["E_mVcm"], cols["Rb_um"], label="blockade radius")
    if "resonance_mVcm" in meta:
        ax_r.axvline(float(meta["resonance_mVcm"]), color="gray", lw=0.6, ls="--")
    ax_r.set_xlabel("E (mV/cm)")
    ax_r.set_ylabel("radius (um)")
    ax_r.set_yscale("log")
    ax_r.legend(fontsize=8)
    return _save(fig, out_path)


def render_figA3(fmax_csv, out_path) -> Path:
    """F_max versus atom number, grouped by (R, E)."""
    _, cols = read_csv(fmax_csv)
    _require(cols, ["n_atoms", "R_um", "E_mVcm", "f_max"], fmax_csv)
    fig, ax = plt.subplots(figsize=(4.8, 3.4))
    combos = sorted(set(zip(cols["R_um"], cols["E_mVcm"])))
    for r_val, e_val in combos:
        mask = (cols["R_um"] == r_val) & (cols["E_mVcm"] == e_val)
        order = np.argsort(cols["n_atoms"][mask])
        ax.plot(
            cols["n_atoms"][mask][order],
            cols["f_max"][mask][order],
            marker="s",
            ms=3,
            label=f"R = {r_val:g} um, E = {e_val:g} mV/cm",
        )
    ax.set_xlabel("number of atoms N")
    ax.set_ylabel("F_max")
    ax.legend(fontsize=7)
    return _save(fig, out_path)


RENDERERS = {
    "fig2a": ("fmax sweep CSV", render_fig2a),
    "fig2b": ("curve cache CSV", render_fig2b),
    "figA1": ("coeffs CSV", render_figA1),
    "figA2": ("coeffs CSV", render_figA2),
    "figA3": ("fmax sweep CSV", render_figA3),
}


def render_figure(figure_id: str, inputs: list[str], out_path, e_res: float = 29.787):
    """Dispatch a figure id onto its renderer.

    fig2dyn takes one or more trajectory CSVs; fig3/figA4 take alternating
    correlator and field CSVs (pairs per panel); the rest take one CSV.
    """
    if figure_id == "fig2dyn":
        return render_fig2dyn(inputs, out_path)
    if figure_id in ("fig3", "figA4"):
        if len(inputs) % 2:
            raise MissingColumns(
                f"{figure_id}: need correlator/field CSV pairs, got {len(inputs)} files"
            )
        panels = list(zip(inputs[0::2], inputs[1::2]))
        return render_fig3(panels, e_res, out_path)
    if figure_id in RENDERERS:
        _, renderer = RENDERERS[figure_id]
        if len(inputs) != 1:
            raise MissingColumns(f"{figure_id}: expected exactly one input CSV")
        return renderer(inputs[0], out_path)
    raise ValueError(f"unknown figure id {figure_id!r}")


FIGURE_IDS = ("fig2a", "fig2b", "fig2dyn", "fig3", "figA1", "figA2", "figA3", "figA4")
