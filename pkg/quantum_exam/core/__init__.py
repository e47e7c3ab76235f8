from .state import (
    NORM_TOLERANCE,
    ZERO_PROJECTION,
    ConsistencyError,
    InvalidArgumentError,
    MeasurementBasis,
    MeasurementResult,
    QuantumStateError,
    QubitBudgetError,
    ShiftMask,
    StateVector,
    apply_hadamard,
    apply_pauli_x,
    apply_shift_mask,
    check_qubit_budget,
    collapse,
    entangle_ancilla,
    ghz_prepare,
    measure,
    outcome_distribution,
    tensor_product,
)
