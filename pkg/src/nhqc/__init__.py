"""Single-shot nonadiabatic holonomic gates on a simulated two-qubit NMR register.

Gate construction and holonomy checks, Trotterized pulse compilation with a
virtual-Z peephole optimizer, and chi-matrix process tomography.
"""
from .compiler import (
    delay_evolution,
    expand_h2_exact,
    lower_physical,
    optimize,
    trotter_error_scan,
    trotter_slice_symmetric,
    trotterize,
)
from .core import (
    LOGICAL_SUBSPACE,
    PauliSum,
    PauliTerm,
    SubspaceBasis,
    expm_generator,
    gate_infidelity,
    pauli_sum_to_matrix,
    phase_invariant_distance,
    tensor_product,
)
from .holonomy import (
    Axis,
    GateSpec,
    HolonomyReport,
    check_holonomic_conditions,
    exact_gate,
    lambda_of_theta,
    logical_block,
    theta_of_lambda,
    three_level_propagator_check,
)
from .pulses import PulseOp, PulseSequence, sequence_to_unitary
from .tomography import (
    FidelityPair,
    ProcessTomography,
    chi_fidelities,
    chi_of_unitary,
    qpt_chi,
    state_fidelities,
)

__version__ = "0.1.0"
