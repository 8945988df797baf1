"""Constant-round multi-party quantum computation on a statevector simulator."""

from .circuits import BoolCircuit, QuantumCircuit
from .protocols import run_clifford_fast_path, run_multi_party, run_two_party
from .qsim import StateVector

__all__ = [
    "BoolCircuit",
    "QuantumCircuit",
    "StateVector",
    "run_clifford_fast_path",
    "run_multi_party",
    "run_two_party",
]
__version__ = "0.1.0"
