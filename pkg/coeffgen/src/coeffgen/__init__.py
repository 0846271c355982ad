"""coeffgen: Stark-table generation and figure scripts for rydsense.

The table is generated once and committed as a versioned data asset in the
simulator repository; the simulator never calls this package at runtime.
Figures consume only the simulator CLI's CSV outputs.
"""

from .atoms import RydbergLevel, parse_level, pair_defect_mhz
from .figures import FIGURE_IDS, render_figure
from .generate import generate_table, render_table
from .model import StarkModel, build_model
from .states import StateSpec, UnsupportedStates, spec_from_labels

__version__ = "0.1.0"

__all__ = [
    "FIGURE_IDS",
    "RydbergLevel",
    "StarkModel",
    "StateSpec",
    "UnsupportedStates",
    "build_model",
    "generate_table",
    "pair_defect_mhz",
    "parse_level",
    "render_figure",
    "render_table",
    "spec_from_labels",
]
