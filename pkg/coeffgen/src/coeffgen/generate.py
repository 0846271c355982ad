"""Emit the Stark-coefficient CSV consumed by the simulator.

Format contract (the simulator's table loader): UTF-8, '#' comment lines
carry key=value metadata, the exact header ``E_mVcm,delta_MHz,C3_MHz_um3``,
then one ``E,delta,C3`` row per grid point with strictly increasing E,
C3 > 0 everywhere and a single delta sign change at the resonance.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .model import StarkModel, build_model
from .states import StateSpec

TABLE_HEADER = "E_mVcm,delta_MHz,C3_MHz_um3"


def render_table(spec: StateSpec, model: StarkModel | None = None) -> str:
    """Render the table text for a generation request."""
    spec.validate_supported()
    model = model or build_model()
    n_points = int(round((spec.e_stop - spec.e_start) / spec.e_step)) + 1
    e_grid = spec.e_start + spec.e_step * np.arange(n_points)
    delta = model.delta_mhz(e_grid)
    c3 = model.c3_mhz_um3(e_grid)

    pair_a = f"{spec.doubly.label}+{spec.doubly.label}"
    pair_b = f"{spec.partner_a.label}+{spec.partner_b.label}"
    lines = [
        f"# species={spec.species}",
        f"# pair_state_a={pair_a}",
        f"# pair_state_b={pair_b}",
        f"# b_field_G={spec.b_field_gauss!r}",
        f"# e_res_mVcm={model.e_res!r}",
        f"# delta0_MHz={model.delta0_mhz!r}",
        f"# c30_MHz_um3={model.c30_mhz_um3!r}",
        f"# c3_curvature_per_mVcm2={model.c3_curvature!r}",
        "# source=coeffgen-0.1 quantum-defect + calibrated Stark-response model",
        TABLE_HEADER,
    ]
    for e_val, d_val, c_val in zip(e_grid, delta, c3):
        lines.append(f"{float(e_val)!r},{float(d_val)!r},{float(c_val)!r}")
    return "\n".join(lines) + "\n"


def generate_table(spec: StateSpec, out_path) -> Path:
    """Write the table CSV and return its path."""
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(render_table(spec), encoding="utf-8")
    return out_path
