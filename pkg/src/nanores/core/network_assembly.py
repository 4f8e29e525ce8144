"""
Monte Carlo self-assembly of nanowire networks.

Wires are dropped on a square substrate with uniform centres, uniform
orientations and truncated-normal lengths. Every interior crossing of two
segments becomes a junction; source and ground are the wires nearest the
(0, 0) and (side, side) corners.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog
from scipy import sparse
from scipy.sparse import csgraph
from scipy.spatial import cKDTree

from nanores.config.settings import AssemblyConfig
from nanores.errors import InvalidArgument, PercolationFailure
from nanores.models.network import Junction, Nanowire, NetworkTopology, Point, build_adjacency

logger = structlog.get_logger()


def segment_crossings(
    p: np.ndarray, r: np.ndarray, q: np.ndarray, s: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorized open-segment crossing test for segments p + t*r and q + u*s.

    Returns (mask, points). Parallel, collinear and endpoint-touching pairs are
    not crossings.
    """
    denom = r[:, 0] * s[:, 1] - r[:, 1] * s[:, 0]
    qp = q - p
    t_num = qp[:, 0] * s[:, 1] - qp[:, 1] * s[:, 0]
    u_num = qp[:, 0] * r[:, 1] - qp[:, 1] * r[:, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = t_num / denom
        u = u_num / denom
    mask = (denom != 0.0) & (t > 0.0) & (t < 1.0) & (u > 0.0) & (u < 1.0)
    points = p + t[:, None] * r
    return mask, points


def intersect(a: Nanowire, b: Nanowire) -> Optional[Point]:
    """Interior crossing point of two wires, or None."""
    p = np.array([a.p1], dtype=np.float64)
    r = np.array([a.p2], dtype=np.float64) - p
    q = np.array([b.p1], dtype=np.float64)
    s = np.array([b.p2], dtype=np.float64) - q
    mask, points = segment_crossings(p, r, q, s)
    if not mask[0]:
        return None
    return (float(points[0, 0]), float(points[0, 1]))


def find_junctions(wires: Sequence[Nanowire], substrate_side: float) -> List[Junction]:
    """
    All wire crossings that lie on the closed substrate square.

    Candidate pairs come from a k-d tree over wire midpoints: two segments can
    only cross when their midpoints are closer than the longest wire.
    """
    n = len(wires)
    if n < 2:
        return []
    ends = np.array([(w.p1[0], w.p1[1], w.p2[0], w.p2[1]) for w in wires], dtype=np.float64)
    p1, p2 = ends[:, :2], ends[:, 2:]
    mids = (p1 + p2) / 2.0
    max_len = float(np.max(np.hypot(*(p2 - p1).T)))

    pairs = cKDTree(mids).query_pairs(r=max_len * (1.0 + 1e-9), output_type="ndarray")
    if len(pairs) == 0:
        return []
    pairs = np.sort(pairs, axis=1)
    pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    a, b = pairs[:, 0], pairs[:, 1]

    mask, points = segment_crossings(p1[a], p2[a] - p1[a], p1[b], p2[b] - p1[b])
    on_substrate = np.all((points >= 0.0) & (points <= substrate_side), axis=1)
    keep = np.flatnonzero(mask & on_substrate)

    return [
        Junction(
            id=jid,
            wire_a=int(a[i]),
            wire_b=int(b[i]),
            position=(float(points[i, 0]), float(points[i, 1])),
        )
        for jid, i in enumerate(keep)
    ]


def percolates(
    n_wires: int, junctions: Sequence[Junction], source: int, ground: int
) -> Tuple[bool, np.ndarray]:
    """Whether source and ground share a component, plus the component labels."""
    if junctions:
        edges = np.array([(j.wire_a, j.wire_b) for j in junctions], dtype=np.int64)
        graph = sparse.coo_matrix(
            (np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n_wires, n_wires)
        )
    else:
        graph = sparse.coo_matrix((n_wires, n_wires))
    _, labels = csgraph.connected_components(graph, directed=False)
    return bool(labels[source] == labels[ground]), labels


def electrode_wires(wires: Sequence[Nanowire], substrate_side: float) -> Tuple[int, int]:
    """Source nearest (0, 0) and ground nearest (side, side); ties go to the lowest id."""
    mids = np.array([w.midpoint for w in wires], dtype=np.float64)
    source = int(np.argmin(np.hypot(mids[:, 0], mids[:, 1])))
    to_far = np.hypot(mids[:, 0] - substrate_side, mids[:, 1] - substrate_side)
    to_far[source] = np.inf
    ground = int(np.argmin(to_far))
    return source, ground


def build_topology(
    wires: Sequence[Nanowire],
    substrate_side: float,
    seed: int = 0,
    source: Optional[int] = None,
    ground: Optional[int] = None,
) -> NetworkTopology:
    """
    Assemble a topology from explicit wires.

    Raises:
        PercolationFailure: source and ground are not connected
    """
    wires = tuple(wires)
    if len(wires) < 2:
        raise InvalidArgument("A network needs at least two wires", n_wires=len(wires))
    junctions = tuple(find_junctions(wires, substrate_side))
    corner_source, corner_ground = electrode_wires(wires, substrate_side)
    source = corner_source if source is None else source
    ground = corner_ground if ground is None else ground
    if source == ground:
        raise InvalidArgument("Source and ground must be different wires", wire=source)

    ok, labels = percolates(len(wires), junctions, source, ground)
    if not ok:
        raise PercolationFailure(
            "Source and ground are not connected",
            seed=seed,
            source_component=int(np.sum(labels == labels[source])),
            ground_component=int(np.sum(labels == labels[ground])),
            junctions=len(junctions),
        )
    return NetworkTopology(
        wires=wires,
        junctions=junctions,
        source_wire=source,
        ground_wire=ground,
        substrate_side=float(substrate_side),
        seed=int(seed),
        adjacency=build_adjacency(len(wires), junctions),
    )


def sample_wires(config: AssemblyConfig, seed: int) -> List[Nanowire]:
    """Draw wires from the seeded generator."""
    rng = np.random.default_rng(seed)
    n = config.n_wires
    side = config.side

    lengths = rng.normal(config.mean_length, config.std_length, size=n)
    floor = config.mean_length / 10.0
    short = lengths < floor
    while np.any(short):
        lengths[short] = rng.normal(config.mean_length, config.std_length, size=int(short.sum()))
        short = lengths < floor

    centres = rng.uniform(0.0, side, size=(n, 2))
    angles = rng.uniform(0.0, np.pi, size=n)
    half = 0.5 * lengths[:, None] * np.column_stack([np.cos(angles), np.sin(angles)])
    p1 = centres - half
    p2 = centres + half
    return [
        Nanowire(id=i, p1=(float(p1[i, 0]), float(p1[i, 1])), p2=(float(p2[i, 0]), float(p2[i, 1])))
        for i in range(n)
    ]


def assemble(config: AssemblyConfig) -> NetworkTopology:
    """
    Self-assemble a percolating network.

    On percolation failure the seed is incremented (seed+1, seed+2, ...) up to
    ``max_retries`` times. Identical configs give identical topologies.
    """
    errors = config.validate()
    if errors:
        raise InvalidArgument("Invalid assembly config: " + "; ".join(errors))

    last_failure: Optional[PercolationFailure] = None
    for attempt in range(config.max_retries + 1):
        seed = config.seed + attempt
        wires = sample_wires(config, seed)
        try:
            topology = build_topology(wires, config.side, seed=seed)
        except PercolationFailure as e:
            logger.debug("Assembly did not percolate, reseeding", **{**e.context, "seed": seed})
            last_failure = e
            continue
        logger.debug(
            "Network assembled",
            seed=seed,
            attempts=attempt + 1,
            wires=topology.n_wires,
            junctions=topology.n_junctions,
        )
        return topology

    assert last_failure is not None
    raise PercolationFailure(
        "Percolation not achieved within retry budget",
        first_seed=config.seed,
        retries=config.max_retries,
        **{k: v for k, v in last_failure.context.items() if k != "seed"},
    )
