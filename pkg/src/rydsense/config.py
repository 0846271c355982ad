"""Run-configuration loading and validation for the CLI.

One YAML document per run, overridable with ``--set section.key=value`` flags
(flags win).  Every physical quantity carries an explicit unit suffix; the
Rabi frequency in particular must be tagged (``omega_MHz`` for h-unit MHz,
converted by 2*pi internally, or ``omega_rad_per_us`` for angular units).
Field values given as ``resonance`` or ``<factor>*resonance`` are resolved
against the loaded table's resonance field.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Any, Optional

import yaml

from .dynamics import TWO_PI, DriveSpec
from .errors import ConfigError
from .geometry import (
    ArrayGeometry,
    FieldProfile,
    GaussianField,
    GradientField,
    RowSpec,
    SinusoidField,
    TabulatedField,
    UniformField,
)


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    data.setdefault("_base_dir", str(path.parent))
    return data


def apply_overrides(config: dict, overrides: list[str]) -> dict:
    """Apply ``section.key=value`` overrides (values parsed as YAML)."""
    for item in overrides:
        key_path, sep, raw_value = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        try:
            value = yaml.safe_load(raw_value)
        except yaml.YAMLError as exc:
            raise ConfigError(f"override {item!r}: {exc}") from exc
        node = config
        parts = key_path.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {item!r}: {part} is not a mapping")
        node[parts[-1]] = value
    return config


def config_hash(config: dict) -> str:
    """Stable digest of the merged configuration."""
    canonical = json.dumps(
        {k: v for k, v in config.items() if not k.startswith("_")},
        sort_keys=True,
        separators=(",", ":"),
        default=str,
    )
    return hashlib.sha256(canonical.encode()).hexdigest()


def _section(config: dict, name: str, required: bool = True) -> dict:
    value = config.get(name)
    if value is None:
        if required:
            raise ConfigError(f"{name}: section missing")
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{name}: must be a mapping")
    return value


def _number(section: dict, path: str, key: str, default=None, required=False):
    value = section.get(key, None)
    if value is None:
        if required:
            raise ConfigError(f"{path}.{key}: missing")
        return default
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}: expected number, got {value!r}")
    if not math.isfinite(float(value)):
        raise ConfigError(f"{path}.{key}: not finite")
    return float(value)


def resolve_table_path(config: dict) -> Path:
    raw = config.get("table")
    if not raw:
        raise ConfigError("table: path missing")
    path = Path(raw)
    if not path.is_absolute():
        path = Path(config.get("_base_dir", ".")) / path
    if not path.exists():
        raise ConfigError(f"table: file not found: {path}")
    return path


def parse_drive(config: dict) -> DriveSpec:
    drive = _section(config, "drive")
    omega_mhz = _number(drive, "drive", "omega_MHz")
    omega_rad = _number(drive, "drive", "omega_rad_per_us")
    if (omega_mhz is None) == (omega_rad is None):
        raise ConfigError(
            "drive: exactly one of omega_MHz / omega_rad_per_us is required"
        )
    omega = TWO_PI * omega_mhz if omega_mhz is not None else omega_rad
    det_mhz = _number(drive, "drive", "detuning_MHz")
    det_rad = _number(drive, "drive", "detuning_rad_per_us")
    if det_mhz is not None and det_rad is not None:
        raise ConfigError("drive: give detuning in one unit only")
    detuning = TWO_PI * det_mhz if det_mhz is not None else (det_rad or 0.0)
    if omega <= 0:
        raise ConfigError("drive: omega must be > 0")
    return DriveSpec(omega=omega, detuning=detuning)


def parse_geometry(config: dict) -> ArrayGeometry:
    geo = _section(config, "geometry")
    pitch = _number(geo, "geometry", "pitch_x_um", default=5.0)
    rows_raw = geo.get("rows")
    if not isinstance(rows_raw, list) or not rows_raw:
        raise ConfigError("geometry.rows: need a nonempty list")
    rows = []
    for i, row in enumerate(rows_raw):
        if not isinstance(row, dict):
            raise ConfigError(f"geometry.rows[{i}]: must be a mapping")
        n_atoms = row.get("n_atoms")
        if not isinstance(n_atoms, int) or n_atoms < 1:
            raise ConfigError(f"geometry.rows[{i}].n_atoms: positive integer required")
        spacing = _number(row, f"geometry.rows[{i}]", "spacing_um", required=True)
        y_offset = _number(row, f"geometry.rows[{i}]", "y_offset_um", default=0.0)
        rows.append(RowSpec(n_atoms=n_atoms, spacing=spacing, y_offset=y_offset))
    try:
        return ArrayGeometry(pitch_x=pitch, rows=tuple(rows))
    except ValueError as exc:
        raise ConfigError(f"geometry: {exc}") from exc


def resolve_field_value(value: Any, e_res: Optional[float], path: str) -> float:
    """Numbers pass through; 'resonance' or '<k>*resonance' use the table root."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        text = value.strip().lower()
        factor = 1.0
        if text.endswith("*resonance"):
            factor_text = text[: -len("*resonance")]
            try:
                factor = float(factor_text)
            except ValueError as exc:
                raise ConfigError(f"{path}: cannot parse {value!r}") from exc
            text = "resonance"
        if text == "resonance":
            if e_res is None:
                raise ConfigError(f"{path}: table has no resonance to resolve {value!r}")
            return factor * e_res
    raise ConfigError(f"{path}: expected number or '<k>*resonance', got {value!r}")


def parse_field(config: dict, e_res: Optional[float]) -> FieldProfile:
    section = _section(config, "field")
    kind = section.get("kind")
    params = section.get("params") or {}
    if not isinstance(params, dict):
        raise ConfigError("field.params: must be a mapping")

    def field_value(key, default=None, required=False):
        value = params.get(key)
        if value is None:
            if required:
                raise ConfigError(f"field.params.{key}: missing")
            return default
        return resolve_field_value(value, e_res, f"field.params.{key}")

    if kind == "uniform":
        return UniformField(e0=field_value("E0_mVcm", required=True))
    if kind == "gradient":
        return GradientField(
            e_start=field_value("E_start_mVcm", required=True),
            e_end=field_value("E_end_mVcm", required=True),
        )
    if kind == "sinusoid":
        return SinusoidField(
            offset=field_value("offset_mVcm", required=True),
            amplitude=field_value("amplitude_mVcm", required=True),
            period=_number(params, "field.params", "period_atoms", required=True),
            phase=_number(params, "field.params", "phase_atoms", default=0.0),
        )
    if kind == "gaussian":
        return GaussianField(
            baseline=field_value("baseline_mVcm", required=True),
            peak=field_value("peak_mVcm", required=True),
            center_um=_number(params, "field.params", "center_um", required=True),
            width_um=_number(params, "field.params", "width_um", required=True),
        )
    if kind == "tabulated":
        values = params.get("values_mVcm")
        if not isinstance(values, list) or not values:
            raise ConfigError("field.params.values_mVcm: nonempty list required")
        resolved = tuple(
            resolve_field_value(v, e_res, f"field.params.values_mVcm[{i}]")
            for i, v in enumerate(values)
        )
        return TabulatedField(values=resolved)
    raise ConfigError(
        f"field.kind: expected uniform|gradient|sinusoid|gaussian|tabulated, "
        f"got {kind!r}"
    )


def parse_integrator(config: dict) -> dict:
    section = _section(config, "integrator", required=False)
    steps = section.get("steps_per_period", 200)
    if not isinstance(steps, int) or steps < 1:
        raise ConfigError("integrator.steps_per_period: positive integer required")
    norm_tol = _number(section, "integrator", "norm_tol", default=1e-9)
    phase_tol = _number(section, "integrator", "phase_tol", default=None)
    threads = section.get("threads", 1)
    if not isinstance(threads, int) or threads < 1:
        raise ConfigError("integrator.threads: positive integer required")
    if norm_tol <= 0:
        raise ConfigError("integrator.norm_tol: must be > 0")
    return {
        "steps_per_period": steps,
        "norm_tol": norm_tol,
        "phase_tol": phase_tol,
        "threads": threads,
    }


def parse_output(config: dict) -> tuple[Path, str]:
    section = _section(config, "output", required=False)
    out_dir = Path(section.get("dir", "out"))
    if not out_dir.is_absolute():
        out_dir = Path(config.get("_base_dir", ".")) / out_dir
    prefix = section.get("prefix", "run")
    if not isinstance(prefix, str) or not prefix:
        raise ConfigError("output.prefix: nonempty string required")
    return out_dir, prefix


def parse_value_list(raw, e_res, path) -> list[float]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{path}: nonempty list required")
    return [resolve_field_value(v, e_res, f"{path}[{i}]") for i, v in enumerate(raw)]


def parse_e_grid(config: dict, span: tuple[float, float]) -> "np.ndarray":
    import numpy as np

    section = _section(config, "sensing", required=False)
    grid = section.get("e_grid_mVcm") or {}
    if not isinstance(grid, dict):
        raise ConfigError("sensing.e_grid_mVcm: must be a mapping")
    start = _number(grid, "sensing.e_grid_mVcm", "start", default=span[0])
    stop = _number(grid, "sensing.e_grid_mVcm", "stop", default=span[1])
    step = _number(grid, "sensing.e_grid_mVcm", "step", default=0.1)
    if step <= 0 or stop <= start:
        raise ConfigError("sensing.e_grid_mVcm: need step > 0 and stop > start")
    if start < span[0] - 1e-12 or stop > span[1] + 1e-12:
        raise ConfigError(
            f"sensing.e_grid_mVcm: [{start}, {stop}] outside table span {span}"
        )
    n_points = int(round((stop - start) / step)) + 1
    return np.round(start + step * np.arange(n_points), 12)
