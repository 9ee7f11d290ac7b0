"""State preparation from diagonal-only phase-ladder circuits.

Compiles an arbitrary n-qubit target state into a CNOT/RZ/S/H/RY circuit
whose only multi-qubit structure is the diagonal Z-factor of the SRBB
hierarchy, either exactly (closed-form solve) or approximately (two-stage
variational training), and verifies the closed-form depth and gate-count
predictions by construction.
"""

__version__ = "0.1.0"

from .qcore import StateVector, apply_gate, inner_product, kron, probabilities
from .circuit import (
    Circuit,
    CircuitStats,
    GateInstance,
    GateKind,
    Slot,
    bind,
    read_qasm,
    run,
    stats,
    to_qasm,
    unitary_of,
)
from .zfactor import (
    ParameterIndexing,
    PhaseMap,
    PhaseSumError,
    ZFactorTemplate,
    build_z_factor,
    phase_map,
    solve_z_params,
)
from .ladder import (
    CountPrediction,
    QSPTemplate,
    assemble_full,
    build_modulus_template,
    build_phase_template,
    build_qsp_template,
    global_phase_tail,
    predicted_counts,
)
from .exact import (
    AmplitudeBST,
    ExactPreparation,
    NaturalAngles,
    PhaseSolution,
    bst_build,
    exact_prepare,
    ladder_reference_unitary,
    modulus_params_exact,
    natural_angles,
    phase_params_exact,
    ucg_reference,
)
from .variational import (
    AdamConfig,
    LossKind,
    NelderMeadConfig,
    TrainReport,
    TwoStageResult,
    fidelity,
    frobenius_loss,
    su_candidates,
    trace_distance,
    train_stage,
    two_stage_train,
)
from .statelib import (
    StateSpec,
    haar_mean_check,
    haar_random_state,
    hellinger,
    realize,
    spec_from_json,
    spec_to_json,
)

__all__ = [
    "__version__",
    "StateVector", "apply_gate", "inner_product", "kron", "probabilities",
    "Circuit", "CircuitStats", "GateInstance", "GateKind", "Slot",
    "bind", "read_qasm", "run", "stats", "to_qasm", "unitary_of",
    "ParameterIndexing", "PhaseMap", "PhaseSumError", "ZFactorTemplate",
    "build_z_factor", "phase_map", "solve_z_params",
    "CountPrediction", "QSPTemplate", "assemble_full",
    "build_modulus_template", "build_phase_template", "build_qsp_template",
    "global_phase_tail", "predicted_counts",
    "AmplitudeBST", "ExactPreparation", "NaturalAngles", "PhaseSolution",
    "bst_build", "exact_prepare", "ladder_reference_unitary",
    "modulus_params_exact", "natural_angles", "phase_params_exact",
    "ucg_reference",
    "AdamConfig", "LossKind", "NelderMeadConfig", "TrainReport",
    "TwoStageResult", "fidelity", "frobenius_loss", "su_candidates",
    "trace_distance", "train_stage", "two_stage_train",
    "StateSpec", "haar_mean_check", "haar_random_state", "hellinger",
    "realize", "spec_from_json", "spec_to_json",
]
