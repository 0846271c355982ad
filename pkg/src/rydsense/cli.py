"""Command-line surface: reproducible experiments from one config file.

Subcommands::

    coeffs       resonance field plus blockade/crossover radii over the table
    dynamics     tracked basis-state trajectories per row
    fmax         peak-fidelity sweeps over atom number, spacing and field
    correlator   density-density correlator at the fully-excited peak
    curves       forward-model curve cache for the sensing inversion
    sense        field estimate from a readout file against cached curves

All outputs are CSV with '#' metadata (config hash, table checksum, omega,
version) and are written atomically; identical config + seed gives
byte-identical files in serial mode.  Exit codes: 0 success, 2 config error,
3 physics-domain error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import sys
from pathlib import Path

import numpy as np

from . import kernels
from .config import (
    apply_overrides,
    config_hash,
    load_config,
    parse_drive,
    parse_e_grid,
    parse_field,
    parse_geometry,
    parse_integrator,
    parse_output,
    parse_value_list,
    resolve_table_path,
)
from .csvio import atomic_write_text, render_csv
from .dynamics import (
    DriveSpec,
    all_labels,
    build_hamiltonian,
    default_tracked_labels,
    f_max,
    peak_observables,
    run_dynamics,
)
from .errors import ConfigError, IntegratorFailure, NoResonance, RydsenseError
from .geometry import row_fields
from .pairstate import (
    EPS_DEFECT,
    blockade_radius,
    coefficients_at,
    crossover_radius,
    load_stark_table,
    resonance_field,
)
from .sensing import (
    estimate_field,
    forward_curves,
    load_curves,
    load_readout,
    save_curves,
)

VERSION = "0.1.0"


class _RunContext:
    """Everything the subcommands share: config, table, metadata stamp."""

    def __init__(self, config: dict):
        self.config = config
        self.table_path = resolve_table_path(config)
        self.table = load_stark_table(self.table_path)
        self.table_sha = hashlib.sha256(self.table_path.read_bytes()).hexdigest()
        try:
            self.e_res = resonance_field(self.table)
        except NoResonance:
            self.e_res = None
        self.drive = parse_drive(config)
        self.integrator = parse_integrator(config)
        self.out_dir, self.prefix = parse_output(config)
        seed = config.get("seed", 0)
        if not isinstance(seed, int):
            raise ConfigError("seed: integer required")
        self.seed = seed

    def metadata(self) -> dict:
        return {
            "version": VERSION,
            "kernel": kernels.BACKEND,
            "config_sha256": config_hash(self.config),
            "table_sha256": self.table_sha,
            "omega_rad_per_us": self.drive.omega,
            "seed": self.seed,
        }

    def out_path(self, suffix: str) -> Path:
        return self.out_dir / f"{self.prefix}_{suffix}"

    def evolve_kwargs(self) -> dict:
        opts = dict(self.integrator)
        opts.pop("phase_tol", None)
        return opts


def _write(path: Path, header: str, rows, meta: dict) -> Path:
    atomic_write_text(path, render_csv(header, rows, meta))
    return path


def cmd_coeffs(ctx: _RunContext) -> list[Path]:
    rows = []
    for e_val in ctx.table.e_field:
        coeffs = coefficients_at(ctx.table, float(e_val))
        if abs(coeffs.delta) > EPS_DEFECT:
            rc = crossover_radius(coeffs)
            rb = blockade_radius(coeffs, ctx.drive.omega)
        else:
            rc = rb = float("nan")
        delta_mhz = np.interp(e_val, ctx.table.e_field, ctx.table.delta)
        c3_mhz = np.interp(e_val, ctx.table.e_field, ctx.table.c3)
        rows.append((float(e_val), float(delta_mhz), float(c3_mhz), rc, rb))
    meta = ctx.metadata()
    if ctx.e_res is not None:
        meta["resonance_mVcm"] = ctx.e_res
    path = _write(
        ctx.out_path("coeffs.csv"),
        "E_mVcm,delta_MHz,C3_MHz_um3,Rc_um,Rb_um",
        rows,
        meta,
    )
    return [path]


def _tracked_labels(ctx: _RunContext, n_atoms: int) -> list[str]:
    mode = (ctx.config.get("output") or {}).get("tracked", "default")
    if mode == "all":
        if n_atoms > 10:
            raise ConfigError("output.tracked=all supports up to 10 atoms")
        return all_labels(n_atoms)
    if mode == "default":
        return default_tracked_labels(n_atoms)
    raise ConfigError("output.tracked: expected 'default' or 'all'")


def _time_grid(ctx: _RunContext) -> np.ndarray:
    section = ctx.config.get("dynamics") or {}
    periods = section.get("periods", 1.0)
    points = section.get("points", 512)
    if not isinstance(points, int) or points < 2:
        raise ConfigError("dynamics.points: integer >= 2 required")
    if not isinstance(periods, (int, float)) or periods <= 0:
        raise ConfigError("dynamics.periods: positive number required")
    tau = 2.0 * math.pi / ctx.drive.omega
    return np.linspace(0.0, float(periods) * tau, points)


def cmd_dynamics(ctx: _RunContext) -> list[Path]:
    geometry = parse_geometry(ctx.config)
    profile = parse_field(ctx.config, ctx.e_res)
    times = _time_grid(ctx)
    outputs = []
    for r, row in enumerate(geometry.rows):
        h = build_hamiltonian(row, profile, ctx.table, ctx.drive)
        labels = _tracked_labels(ctx, row.n_atoms)
        result = run_dynamics(h, times, labels, **ctx.evolve_kwargs())
        header = "t_us," + ",".join(f"F_{lab}" for lab in labels)
        data = [
            (float(t), *(float(v) for v in fid))
            for t, fid in zip(result.times, result.fidelities)
        ]
        meta = ctx.metadata()
        meta.update({"row": r, "n_atoms": row.n_atoms, "R_um": row.spacing})
        outputs.append(_write(ctx.out_path(f"row{r}_traj.csv"), header, data, meta))
    return outputs


def cmd_fmax(ctx: _RunContext) -> list[Path]:
    sweep = ctx.config.get("sweep")
    if not isinstance(sweep, dict):
        raise ConfigError("sweep: section required for the fmax command")
    e_values = parse_value_list(
        sweep.get("E_mVcm"), ctx.e_res, "sweep.E_mVcm"
    )
    r_values = parse_value_list(sweep.get("R_um"), None, "sweep.R_um")
    n_values = sweep.get("n_atoms") or [3]
    if not isinstance(n_values, list) or not all(
        isinstance(n, int) and n >= 1 for n in n_values
    ):
        raise ConfigError("sweep.n_atoms: list of positive integers required")
    from .geometry import RowSpec, UniformField

    rows = []
    for n_atoms in n_values:
        for r_um in r_values:
            row = RowSpec(n_atoms=n_atoms, spacing=r_um)
            for e_val in e_values:
                h = build_hamiltonian(row, UniformField(e0=e_val), ctx.table, ctx.drive)
                value, t_star = f_max(h, **ctx.evolve_kwargs())
                rows.append((n_atoms, r_um, e_val, value, t_star))
    path = _write(
        ctx.out_path("fmax.csv"),
        "n_atoms,R_um,E_mVcm,f_max,t_star_us",
        rows,
        ctx.metadata(),
    )
    return [path]


def cmd_correlator(ctx: _RunContext) -> list[Path]:
    geometry = parse_geometry(ctx.config)
    profile = parse_field(ctx.config, ctx.e_res)
    outputs = []
    for r, row in enumerate(geometry.rows):
        h = build_hamiltonian(row, profile, ctx.table, ctx.drive)
        fmax_val, matrix, t_star, _ = peak_observables(h, **ctx.evolve_kwargs())
        meta = ctx.metadata()
        meta.update(
            {
                "row": r,
                "n_atoms": row.n_atoms,
                "R_um": row.spacing,
                "f_max": fmax_val,
                "t_star_us": t_star,
            }
        )
        corr_rows = [
            (i + 1, j + 1, float(matrix[i, j]))
            for i in range(row.n_atoms)
            for j in range(row.n_atoms)
        ]
        outputs.append(
            _write(ctx.out_path(f"row{r}_corr.csv"), "i,j,value", corr_rows, meta)
        )
        fields = row_fields(profile, row, ctx.table.span)
        field_rows = [(i + 1, float(e)) for i, e in enumerate(fields)]
        outputs.append(
            _write(ctx.out_path(f"row{r}_field.csv"), "i,E_mVcm", field_rows, meta)
        )
    return outputs


def _curves_path(ctx: _RunContext) -> Path:
    section = ctx.config.get("sensing") or {}
    raw = section.get("curves", None)
    if raw is None:
        return ctx.out_path("curves.csv")
    path = Path(raw)
    if not path.is_absolute():
        path = Path(ctx.config.get("_base_dir", ".")) / path
    return path


def cmd_curves(ctx: _RunContext) -> list[Path]:
    geometry = parse_geometry(ctx.config)
    e_grid = parse_e_grid(ctx.config, ctx.table.span)
    curves = forward_curves(
        geometry.rows,
        ctx.table,
        ctx.drive.omega,
        e_grid,
        detuning=ctx.drive.detuning,
        threads=ctx.integrator["threads"],
    )
    path = _curves_path(ctx)
    meta = ctx.metadata()
    save_curves(path, curves, meta)
    return [path]


def cmd_sense(ctx: _RunContext) -> list[Path]:
    section = ctx.config.get("sensing") or {}
    readout_raw = section.get("readout")
    if not readout_raw:
        raise ConfigError("sensing.readout: path required for the sense command")
    readout_path = Path(readout_raw)
    if not readout_path.is_absolute():
        readout_path = Path(ctx.config.get("_base_dir", ".")) / readout_path
    if not readout_path.exists():
        raise ConfigError(f"sensing.readout: file not found: {readout_path}")
    curves_path = _curves_path(ctx)
    if not curves_path.exists():
        raise ConfigError(f"sensing.curves: file not found: {curves_path}")
    curves = load_curves(
        curves_path,
        expect_omega=ctx.drive.omega,
        expect_meta={"table_sha256": ctx.table_sha},
    )
    readout = load_readout(readout_path)
    estimate = estimate_field(readout, curves)
    meta = ctx.metadata()
    est_path = _write(
        ctx.out_path("estimate.csv"),
        "E_hat_mVcm,lo_mVcm,hi_mVcm,residual",
        [(estimate.e_hat, estimate.lo, estimate.hi, estimate.residual)],
        meta,
    )
    row_path = _write(
        ctx.out_path("estimate_rows.csv"),
        "R_um,N,residual",
        [(key[0], key[1], res) for key, res in estimate.row_residuals],
        meta,
    )
    return [est_path, row_path]


COMMANDS = {
    "coeffs": cmd_coeffs,
    "dynamics": cmd_dynamics,
    "fmax": cmd_fmax,
    "correlator": cmd_correlator,
    "curves": cmd_curves,
    "sense": cmd_sense,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rydsense",
        description="Rydberg tweezer-network electric-field sensing simulator",
    )
    parser.add_argument("--version", action="version", version=f"rydsense {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name, help=f"run the {name} pipeline")
        cmd.add_argument("-c", "--config", required=True, help="YAML run config")
        cmd.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config entry (repeatable; flags win)",
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        apply_overrides(config, args.overrides)
        ctx = _RunContext(config)
        outputs = COMMANDS[args.command](ctx)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except IntegratorFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4
    except RydsenseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    for path in outputs:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
