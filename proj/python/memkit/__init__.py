"""Nodal analysis, index classification and transient simulation of memristive circuits."""

from pathlib import Path

from ._memkit import (
    AnalysisRefusal,
    Circuit,
    CircuitError,
    DomainError,
    Error,
    HypothesisError,
    NewtonError,
    ParseError,
    SingularPencil,
    main,
)

__all__ = [
    "AnalysisRefusal",
    "Circuit",
    "CircuitError",
    "DomainError",
    "Error",
    "HypothesisError",
    "NewtonError",
    "ParseError",
    "SingularPencil",
    "load",
    "main",
]


def load(path):
    """Circuit from a netlist file."""
    return Circuit(Path(path).read_text())
