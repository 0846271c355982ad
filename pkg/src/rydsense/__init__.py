"""rydsense: electric-field metrology with Rydberg tweezer-array networks.

Simulates the field-dependent excitation blockade of driven atom rows near a
pair-state resonance, evolves the many-atom dynamics exactly, and inverts
per-row excitation statistics into absolute field estimates.
"""

from .dynamics import (
    DriveSpec,
    DynamicsResult,
    HamiltonianSpec,
    basis_fidelity,
    basis_index,
    basis_label,
    build_hamiltonian,
    calibrate_omega,
    correlator_at_peak,
    evolve,
    f_max,
    ground_state,
    pair_interaction,
    run_dynamics,
)
from .geometry import (
    ArrayGeometry,
    FieldProfile,
    GaussianField,
    GradientField,
    RowSpec,
    SinusoidField,
    TabulatedField,
    UniformField,
    atom_positions,
    field_at,
    midpoint_field,
    pair_field,
)
from .pairstate import (
    PairCoefficients,
    StarkTable,
    blockade_radius,
    coefficients_at,
    crossover_radius,
    effective_interaction,
    load_stark_table,
    resonance_field,
)
from .sensing import (
    FieldEstimate,
    ForwardCurve,
    RowReadout,
    SensorReadout,
    estimate_field,
    forward_curves,
    simulate_readout,
)

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry",
    "DriveSpec",
    "DynamicsResult",
    "FieldEstimate",
    "FieldProfile",
    "ForwardCurve",
    "GaussianField",
    "GradientField",
    "HamiltonianSpec",
    "PairCoefficients",
    "RowReadout",
    "RowSpec",
    "SensorReadout",
    "SinusoidField",
    "StarkTable",
    "TabulatedField",
    "UniformField",
    "atom_positions",
    "basis_fidelity",
    "basis_index",
    "basis_label",
    "blockade_radius",
    "build_hamiltonian",
    "calibrate_omega",
    "coefficients_at",
    "correlator_at_peak",
    "crossover_radius",
    "effective_interaction",
    "estimate_field",
    "evolve",
    "f_max",
    "field_at",
    "forward_curves",
    "ground_state",
    "load_stark_table",
    "midpoint_field",
    "pair_field",
    "pair_interaction",
    "resonance_field",
    "run_dynamics",
    "simulate_readout",
]
