"""Abstract stabilizer simulation of quantum circuits."""
from .abstract_domains import AbstractBool, AbstractComplex, AbstractZ4, Interval
from .abstract_pauli import AbstractPauli
from .abstract_state import AbstractDensityMatrix, AbstractSimulator
from .circuit_ir import Circuit, Gate, parse
from .pauli_core import ConcretePauli, PauliList

__all__ = [
    "AbstractBool",
    "AbstractComplex",
    "AbstractDensityMatrix",
    "AbstractPauli",
    "AbstractSimulator",
    "AbstractZ4",
    "Circuit",
    "ConcretePauli",
    "Gate",
    "Interval",
    "PauliList",
    "parse",
]
