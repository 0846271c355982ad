from pathlib import Path

import numpy as np
import pytest

from rydsense import (
    RowSpec,
    calibrate_omega,
    forward_curves,
    load_stark_table,
    resonance_field,
)

REPO_ROOT = Path(__file__).resolve().parent.parent
TABLE_PATH = REPO_ROOT / "data" / "stark_rb87_forster_b0.csv"

#: peak fidelity of the 3-atom, 15-um row at zero field used to fix omega
CALIBRATION_TARGET = 0.938


@pytest.fixture(scope="session")
def table():
    return load_stark_table(TABLE_PATH)


@pytest.fixture(scope="session")
def e_res(table):
    return resonance_field(table)


@pytest.fixture(scope="session")
def omega_cal(table):
    row = RowSpec(n_atoms=3, spacing=15.0)
    return calibrate_omega(table, row, 0.0, CALIBRATION_TARGET)


@pytest.fixture(scope="session")
def sensor_rows():
    # Paper-style network: two flat baselines (5, 40 um) and two probes.
    return [
        RowSpec(n_atoms=3, spacing=5.0, y_offset=0.0),
        RowSpec(n_atoms=3, spacing=15.0, y_offset=200.0),
        RowSpec(n_atoms=3, spacing=20.0, y_offset=400.0),
        RowSpec(n_atoms=3, spacing=40.0, y_offset=600.0),
    ]


@pytest.fixture(scope="session")
def sensor_curves(table, omega_cal, sensor_rows):
    grid = np.round(np.arange(0.0, 60.0 + 1e-9, 0.1), 10)
    return forward_curves(sensor_rows, table, omega_cal, grid)
