"""
Circuit data models for nanores.

The weighted Laplacian of the wire graph and the per-timestep solve result.
"""

from dataclasses import dataclass

import numpy as np
from scipy import sparse


@dataclass
class ConductanceMatrix:
    """Weighted Laplacian over wire nodes; edge weights in siemens."""

    laplacian: sparse.csr_matrix
    edges: np.ndarray  # (m, 2) wire ids, oriented a -> b
    weights: np.ndarray  # (m,) junction conductances

    @property
    def n_nodes(self) -> int:
        return int(self.laplacian.shape[0])


@dataclass
class SolveResult:
    """Kirchhoff solution for one drive value."""

    node_voltages: np.ndarray
    junction_drops: np.ndarray
    source_current: float
    g_eff: float
    residual: float = 0.0
    iterations: int = 0

    def to_dict(self) -> dict:
        return {
            "node_voltages": self.node_voltages.tolist(),
            "junction_drops": self.junction_drops.tolist(),
            "source_current": self.source_current,
            "g_eff": self.g_eff,
            "residual": self.residual,
            "iterations": self.iterations,
        }
