"""Dense state-vector core: chi-type states, Bell/FMB bases, projective measurement."""
from .backend import available_backends, current_backend, use_backend
from .state import (
    BELL_BASIS,
    CHI00_TERMS,
    EQ8_LITERAL_QUBITS,
    FMB_BASIS,
    FMB_QUBITS,
    PAULI,
    PROBE,
    Z_BASIS,
    BellOutcome,
    FmbOutcome,
    StateVector,
    apply_pauli,
    bell_state,
    decompose_eq6,
    decompose_eq7,
    eq6_consistent,
    eq7_consistent,
    fidelity,
    fmb_gram,
    fmb_state,
    is_unitary,
    measure_bell,
    measure_fmb,
    measure_z,
    prepare_chi00,
    prepare_z,
    tensor,
)
