"""
Core components for nanores.

This package contains the simulator (ingest, assembly, dynamics, solver,
reservoir) and the linear readouts trained on its output.
"""

from .circuit_solver import KirchhoffSolver
from .reservoir import Reservoir

__all__ = [
    "KirchhoffSolver",
    "Reservoir",
]
