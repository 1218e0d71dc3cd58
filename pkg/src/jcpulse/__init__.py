"""Multi-tone resonant control of a qubit-resonator ladder."""

from jcpulse.system import (
    DressedLabel,
    DressedState,
    DriveOperator,
    SystemParams,
    TransitionSet,
    build_static_hamiltonian,
    dressed_basis_labels,
    dressed_eigensystem,
    dressed_index,
    drive_matrix_elements,
    dispersive_approximations,
    min_frequency_separation,
    transition_frequencies,
)

__version__ = "0.1.0"

__all__ = [
    "DressedLabel",
    "DressedState",
    "DriveOperator",
    "SystemParams",
    "TransitionSet",
    "build_static_hamiltonian",
    "dressed_basis_labels",
    "dressed_eigensystem",
    "dressed_index",
    "drive_matrix_elements",
    "dispersive_approximations",
    "min_frequency_separation",
    "transition_frequencies",
    "__version__",
]
