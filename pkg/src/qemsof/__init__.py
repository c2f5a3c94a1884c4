"""Sampling overhead of quasi-probability quantum error mitigation."""

__version__ = "0.1.0"

from .errors import DimensionError, IllConditioned, InvalidChannelError, PlanMismatch, QEMError, SingularChannel
from .pauli import PauliString, PTMChannel, hadamard_matrix, pauli_mul, pauli_ptm, ptm_of_kraus
from .channels import (
    PauliChannelEta,
    amplitude_damping,
    avg_fidelity,
    bit_flip,
    depolarizing,
    ggep,
    over_rotation,
    pauli_channel,
    phase_flip,
    tensor,
)
from .qem import circuit_sof, prw_qp, quasi_probability, reduced_pauli_qp, sampling_plan, sof, standard_basis
from .bounds import depolarizing_sof, sof_lower_bound, sof_upper_bound
from .twirling import clifford_twirl, imperfect_twirl, pauli_twirl

__all__ = [
    "__version__",
    "QEMError",
    "DimensionError",
    "InvalidChannelError",
    "SingularChannel",
    "IllConditioned",
    "PlanMismatch",
    "PauliString",
    "PTMChannel",
    "PauliChannelEta",
    "hadamard_matrix",
    "pauli_mul",
    "pauli_ptm",
    "ptm_of_kraus",
    "amplitude_damping",
    "avg_fidelity",
    "bit_flip",
    "depolarizing",
    "ggep",
    "over_rotation",
    "pauli_channel",
    "phase_flip",
    "tensor",
    "standard_basis",
    "quasi_probability",
    "reduced_pauli_qp",
    "prw_qp",
    "sampling_plan",
    "sof",
    "circuit_sof",
    "sof_lower_bound",
    "sof_upper_bound",
    "depolarizing_sof",
    "pauli_twirl",
    "clifford_twirl",
    "imperfect_twirl",
]
