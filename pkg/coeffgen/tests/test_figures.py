"""Render every figure id from CSVs produced by the simulator CLI.

The simulator is driven through its installed `rydsense` entry point on
small configurations; only the CSV files cross the package boundary.
"""

import subprocess
from pathlib import Path

import pytest
import yaml

from coeffgen import FIGURE_IDS
from coeffgen.cli import main as coeffgen_main

REPO_ROOT = Path(__file__).resolve().parents[2]
TABLE = REPO_ROOT / "data" / "stark_rb87_forster_b0.csv"

OMEGA = 2.2118169257233213


def run_rydsense(command, config, workdir, overrides=()):
    cfg_path = workdir / f"{command}_{abs(hash(str(config))) % 99999}.yaml"
    cfg_path.write_text(yaml.safe_dump(config), encoding="utf-8")
    argv = ["rydsense", command, "-c", str(cfg_path)]
    for item in overrides:
        argv += ["--set", item]
    result = subprocess.run(argv, capture_output=True, text=True, check=False)
    assert result.returncode == 0, f"{argv}: {result.stderr}"
    return [Path(line) for line in result.stdout.strip().splitlines()]


def base_config(out_dir, prefix, **extra):
    config = {
        "table": str(TABLE),
        "seed": 99,
        "drive": {"omega_rad_per_us": OMEGA},
        "integrator": {"steps_per_period": 200, "norm_tol": 1e-9, "threads": 1},
        "output": {"dir": str(out_dir), "prefix": prefix},
    }
    config.update(extra)
    return config


@pytest.fixture(scope="session")
def cli_outputs(tmp_path_factory):
    """One small simulator run per figure data source."""
    work = tmp_path_factory.mktemp("cli_csv")
    out = work / "out"
    files = {}

    row3 = [{"n_atoms": 3, "spacing_um": 15.0, "y_offset_um": 0.0}]
    geometry = {"pitch_x_um": 5.0, "rows": row3}

    files["coeffs"] = run_rydsense(
        "coeffs", base_config(out, "a2"), work
    )[0]

    files["fmax_r"] = run_rydsense(
        "fmax",
        base_config(
            out, "f2a",
            sweep={"n_atoms": [3], "R_um": [10.0, 15.0, 20.0],
                   "E_mVcm": [0, 25.0, "resonance"]},
        ),
        work,
    )[0]

    files["fmax_n"] = run_rydsense(
        "fmax",
        base_config(
            out, "a3",
            sweep={"n_atoms": [2, 3], "R_um": [15.0, 20.0],
                   "E_mVcm": [0, "resonance"]},
        ),
        work,
    )[0]

    files["curves"] = run_rydsense(
        "curves",
        base_config(
            out, "f2b",
            geometry={
                "pitch_x_um": 5.0,
                "rows": [
                    {"n_atoms": 2, "spacing_um": 5.0, "y_offset_um": 0.0},
                    {"n_atoms": 2, "spacing_um": 15.0, "y_offset_um": 200.0},
                    {"n_atoms": 2, "spacing_um": 40.0, "y_offset_um": 400.0},
                ],
            },
            sensing={"e_grid_mVcm": {"start": 0.0, "stop": 50.0, "step": 2.0},
                     "curves": str(out / "f2b_curves.csv")},
        ),
        work,
    )[0]

    files["traj"] = run_rydsense(
        "dynamics",
        base_config(
            out, "dyn",
            geometry=geometry,
            field={"kind": "uniform", "params": {"E0_mVcm": 25.0}},
            dynamics={"periods": 1.0, "points": 65},
            output={"dir": str(out), "prefix": "dyn", "tracked": "all"},
        ),
        work,
    )[0]

    sinusoid = run_rydsense(
        "correlator",
        base_config(
            out, "f3a",
            geometry=geometry,
            field={
                "kind": "sinusoid",
                "params": {
                    "offset_mVcm": "0.6*resonance",
                    "amplitude_mVcm": "0.4*resonance",
                    "period_atoms": 10.0,
                    "phase_atoms": 2.5,
                },
            },
        ),
        work,
    )
    tabulated = run_rydsense(
        "correlator",
        base_config(
            out, "a4a",
            geometry=geometry,
            field={
                "kind": "tabulated",
                "params": {"values_mVcm": ["resonance", 0.0, "resonance"]},
            },
        ),
        work,
    )
    files["corr_panels"] = [*sinusoid, *tabulated]
    return files


FIGURE_INPUTS = {
    "fig2a": lambda f: [f["fmax_r"]],
    "fig2b": lambda f: [f["curves"]],
    "fig2dyn": lambda f: [f["traj"]],
    "fig3": lambda f: f["corr_panels"],
    "figA1": lambda f: [f["coeffs"]],
    "figA2": lambda f: [f["coeffs"]],
    "figA3": lambda f: [f["fmax_n"]],
    "figA4": lambda f: f["corr_panels"][2:],
}


@pytest.mark.parametrize("figure_id", FIGURE_IDS)
def test_render_all_figure_ids(figure_id, cli_outputs, tmp_path):
    inputs = [str(p) for p in FIGURE_INPUTS[figure_id](cli_outputs)]
    out_path = tmp_path / f"{figure_id}.png"
    code = coeffgen_main(["render", figure_id, "-o", str(out_path), *inputs])
    assert code == 0
    assert out_path.exists() and out_path.stat().st_size > 10_000


def test_generate_cli(tmp_path):
    out = tmp_path / "table.csv"
    assert coeffgen_main(["generate", "-o", str(out)]) == 0
    text = out.read_text(encoding="utf-8")
    assert "E_mVcm,delta_MHz,C3_MHz_um3" in text
    assert len(text.splitlines()) > 600


def test_generate_cli_rejects_unknown_states(tmp_path):
    out = tmp_path / "table.csv"
    assert coeffgen_main(["generate", "-o", str(out), "--doubly", "60D3/2"]) == 2
