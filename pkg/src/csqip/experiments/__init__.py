from .generators import (
    TripartiteResult,
    ghz_generator,
    ghz_target,
    resource_state,
    tripartite_generator,
)
from .loss import (
    LossAnalysisResult,
    SweepRow,
    decompose_reduced_state,
    delta,
    lossy_generator,
    success_sweep,
    success_threshold,
    sweep_csv,
)
from .qubit import printed_u_matrix, qubit_reference_protocol, xor_gate_matrix
from .xor import XorRunResult, xor_closed_form_state, optical_xor_protocol
