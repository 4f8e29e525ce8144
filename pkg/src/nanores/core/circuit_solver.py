"""
Kirchhoff solver for the junction resistor network.

Wires are equipotential nodes and junctions are conductances between them.
The source voltage is imposed as a Dirichlet condition, ground is eliminated,
and only the component containing the electrodes is solved; wires outside it
are reported at 0 V. Because the network is linear within a timestep, the
system is solved once for a unit drive and scaled.
"""

from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.sparse import linalg as splinalg

from nanores.config.settings import DynamicsParams
from nanores.core.junction_dynamics import conductance
from nanores.errors import InvalidArgument, NotPercolating, ShapeError, SolverDiverged
from nanores.models.circuit import ConductanceMatrix, SolveResult
from nanores.models.network import NetworkTopology

RESIDUAL_TOL = 1e-9


def laplacian(n_nodes: int, edges: np.ndarray, weights: np.ndarray) -> sparse.csr_matrix:
    """Weighted graph Laplacian D - W."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    weights = np.asarray(weights, dtype=np.float64)
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    adjacency = sparse.csr_matrix(
        (np.concatenate([weights, weights]), (rows, cols)), shape=(n_nodes, n_nodes)
    )
    return sparse.csr_matrix(csgraph.laplacian(adjacency))


def matrix_from_edges(n_nodes: int, edges: np.ndarray, weights: np.ndarray) -> ConductanceMatrix:
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    weights = np.asarray(weights, dtype=np.float64)
    if len(edges) != len(weights):
        raise ShapeError("One weight per edge required", edges=len(edges), weights=len(weights))
    return ConductanceMatrix(
        laplacian=laplacian(n_nodes, edges, weights), edges=edges, weights=weights
    )


def build_matrix(
    topology: NetworkTopology, states: np.ndarray, params: DynamicsParams
) -> ConductanceMatrix:
    """Laplacian of the wire graph with G_j = conductance(g_j) on each junction."""
    states = np.asarray(states, dtype=np.float64)
    if states.shape != (topology.n_junctions,):
        raise ShapeError(
            "One memory state per junction required",
            states=states.shape,
            junctions=topology.n_junctions,
        )
    return matrix_from_edges(topology.n_wires, topology.edge_array(), conductance(states, params))


class KirchhoffSolver:
    """
    Reusable solver for a fixed wire graph with changing junction conductances.

    The structural work (component labelling, reduced-system indexing) is done
    once; each ``solve`` only assembles and solves the reduced system.
    """

    def __init__(
        self,
        n_nodes: int,
        edges: np.ndarray,
        source: int,
        ground: int,
        method: str = "direct",
        tol: float = RESIDUAL_TOL,
    ):
        """Initialize the solver structure."""
        if source == ground:
            raise InvalidArgument("Source and ground must differ", node=source)
        if method not in ("direct", "cg"):
            raise InvalidArgument("Unknown solver method", method=method)
        self.n_nodes = n_nodes
        self.edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        self.source = source
        self.ground = ground
        self.method = method
        self.tol = tol
        self._x_prev: Optional[np.ndarray] = None
        self.last_residual = 0.0
        self.last_iterations = 0

        structure = sparse.coo_matrix(
            (np.ones(len(self.edges)), (self.edges[:, 0], self.edges[:, 1])),
            shape=(n_nodes, n_nodes),
        )
        _, labels = csgraph.connected_components(structure, directed=False)
        if labels[source] != labels[ground]:
            raise NotPercolating("Source and ground are in different components")
        self.active = labels == labels[source]

        unknown = self.active.copy()
        unknown[[source, ground]] = False
        self.unknown = np.flatnonzero(unknown)
        position = np.full(n_nodes, -1, dtype=np.int64)
        position[self.unknown] = np.arange(len(self.unknown))
        pa = position[self.edges[:, 0]]
        pb = position[self.edges[:, 1]]

        # diagonal contributions
        a_in, b_in = pa >= 0, pb >= 0
        self._diag_pos = np.concatenate([pa[a_in], pb[b_in]])
        self._diag_edge = np.concatenate([np.flatnonzero(a_in), np.flatnonzero(b_in)])
        # off-diagonal couplings between unknowns
        both = np.flatnonzero(a_in & b_in)
        self._off_edge = both
        self._off_rows = np.concatenate([pa[both], pb[both]])
        self._off_cols = np.concatenate([pb[both], pa[both]])
        # unknowns coupled to the source feed the right-hand side
        a_src = b_in & (self.edges[:, 0] == source)
        b_src = a_in & (self.edges[:, 1] == source)
        self._rhs_pos = np.concatenate([pb[a_src], pa[b_src]])
        self._rhs_edge = np.concatenate([np.flatnonzero(a_src), np.flatnonzero(b_src)])
        # current leaving the source along each incident edge is sign * w * drop
        incident = (self.edges[:, 0] == source) | (self.edges[:, 1] == source)
        self._src_edge = np.flatnonzero(incident)
        self._src_sign = np.where(self.edges[self._src_edge, 0] == source, 1.0, -1.0)

    @classmethod
    def for_topology(cls, topology: NetworkTopology, method: str = "direct") -> "KirchhoffSolver":
        return cls(
            topology.n_wires,
            topology.edge_array(),
            topology.source_wire,
            topology.ground_wire,
            method=method,
        )

    def reduced_system(self, weights: np.ndarray):
        """Reduced matrix and unit-drive right-hand side."""
        n = len(self.unknown)
        data = np.concatenate([weights[self._diag_edge], -weights[self._off_edge], -weights[self._off_edge]])
        rows = np.concatenate([self._diag_pos, self._off_rows])
        cols = np.concatenate([self._diag_pos, self._off_cols])
        matrix = sparse.csc_matrix((data, (rows, cols)), shape=(n, n))
        rhs = np.bincount(self._rhs_pos, weights=weights[self._rhs_edge], minlength=n).astype(np.float64)
        return matrix, rhs

    def _solve_unit(self, weights: np.ndarray) -> np.ndarray:
        """Node voltages for a 1 V drive."""
        voltages = np.zeros(self.n_nodes)
        voltages[self.source] = 1.0
        if len(self.unknown) == 0:
            return voltages

        matrix, rhs = self.reduced_system(weights)
        iterations = 0
        if self.method == "direct":
            x = splinalg.spsolve(matrix, rhs)
        else:
            counter = {"n": 0}

            def _count(_xk):
                counter["n"] += 1

            preconditioner = sparse.diags(1.0 / matrix.diagonal())
            x, info = splinalg.cg(
                matrix,
                rhs,
                x0=self._x_prev,
                rtol=self.tol * 0.1,
                atol=0.0,
                maxiter=20 * len(self.unknown),
                M=preconditioner,
                callback=_count,
            )
            iterations = counter["n"]
            if info != 0:
                raise SolverDiverged(
                    "Conjugate gradient did not converge",
                    iterations=iterations,
                    residual=_relative_residual(matrix, x, rhs),
                )
            self._x_prev = x

        residual = _relative_residual(matrix, x, rhs)
        if not residual <= self.tol:
            raise SolverDiverged("Residual above tolerance", residual=residual, iterations=iterations)
        self.last_residual = residual
        self.last_iterations = iterations
        voltages[self.unknown] = x
        return voltages

    def solve(self, weights: np.ndarray, v_drive: float) -> SolveResult:
        """
        Node voltages, junction drops, source current and effective conductance.

        g_eff comes from the unit-drive solution, so it does not depend on the
        drive amplitude and is defined at v_drive = 0.
        """
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (len(self.edges),):
            raise ShapeError("One weight per edge required", weights=weights.shape, edges=len(self.edges))
        unit = self._solve_unit(weights)
        unit_drops = unit[self.edges[:, 0]] - unit[self.edges[:, 1]]
        g_eff = float(np.sum(self._src_sign * weights[self._src_edge] * unit_drops[self._src_edge]))

        voltages = unit * v_drive
        drops = voltages[self.edges[:, 0]] - voltages[self.edges[:, 1]]
        current = float(np.sum(self._src_sign * weights[self._src_edge] * drops[self._src_edge]))
        return SolveResult(
            node_voltages=voltages,
            junction_drops=drops,
            source_current=current,
            g_eff=g_eff,
            residual=self.last_residual,
            iterations=self.last_iterations,
        )


def _relative_residual(matrix, x: np.ndarray, rhs: np.ndarray) -> float:
    r = np.linalg.norm(rhs - matrix @ x)
    scale = np.linalg.norm(rhs)
    if scale == 0.0:
        return float(r)
    return float(r / scale)


def solve(
    matrix: ConductanceMatrix,
    source: int,
    ground: int,
    v_drive: float,
    method: str = "direct",
) -> SolveResult:
    """Solve the network for one drive value."""
    solver = KirchhoffSolver(matrix.n_nodes, matrix.edges, source, ground, method=method)
    return solver.solve(matrix.weights, v_drive)


def effective_conductance(matrix: ConductanceMatrix, source: int, ground: int) -> float:
    """Two-point source-ground conductance (siemens)."""
    return solve(matrix, source, ground, 1.0).g_eff


def kcl_residual(matrix: ConductanceMatrix, result: SolveResult, source: int, ground: int) -> float:
    """Largest net current at a non-electrode node, relative to the source current."""
    net = matrix.laplacian @ result.node_voltages
    net[[source, ground]] = 0.0
    if result.source_current == 0.0:
        return float(np.max(np.abs(net))) if net.size else 0.0
    return float(np.max(np.abs(net)) / abs(result.source_current))
