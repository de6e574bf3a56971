"""Statevector simulation of symmetry breaking and restoration for small fermionic models."""

__version__ = "0.1.0"

from .errors import EmptySectorError, NumericalError, ValidationError
from .models import (
    HubbardModel,
    PairingModel,
    Spectrum,
    build_hubbard,
    build_pairing,
    exact_diagonalize,
    state_spectrum,
)
from .pauli import PauliString, PauliSum
from .statevector import Circuit, Gate, Statevector
from .symmetry import Projector, SymmetryOperator, symmetry_operator

__all__ = [
    "Circuit",
    "EmptySectorError",
    "Gate",
    "HubbardModel",
    "NumericalError",
    "PairingModel",
    "PauliString",
    "PauliSum",
    "Projector",
    "Spectrum",
    "Statevector",
    "SymmetryOperator",
    "ValidationError",
    "build_hubbard",
    "build_pairing",
    "exact_diagonalize",
    "state_spectrum",
    "symmetry_operator",
]
