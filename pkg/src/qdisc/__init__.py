"""Quantum binary decision theory for detecting small unitary perturbations of qubits."""

from qdisc.core import (
    BinaryPVM,
    ContractViolation,
    DimensionError,
    DomainError,
    InvalidStateError,
    QDiscError,
)

__version__ = "0.1.0"

__all__ = [
    "BinaryPVM",
    "ContractViolation",
    "DimensionError",
    "DomainError",
    "InvalidStateError",
    "QDiscError",
    "__version__",
]
