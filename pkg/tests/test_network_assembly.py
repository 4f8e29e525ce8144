from collections import deque

import numpy as np
import pytest

from nanores.config.settings import AssemblyConfig
from nanores.core.network_assembly import (
    assemble,
    build_topology,
    electrode_wires,
    find_junctions,
    intersect,
    sample_wires,
)
from nanores.errors import InvalidArgument, PercolationFailure
from nanores.models.network import Nanowire, NetworkTopology


def _wire(i, x1, y1, x2, y2):
    return Nanowire(id=i, p1=(x1, y1), p2=(x2, y2))


def _orient(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _brute_force_pairs(wires, side):
    """Pairwise orientation test over every wire pair."""
    pairs = set()
    for i, a in enumerate(wires):
        for b in wires[i + 1 :]:
            d1, d2 = _orient(a.p1, a.p2, b.p1), _orient(a.p1, a.p2, b.p2)
            d3, d4 = _orient(b.p1, b.p2, a.p1), _orient(b.p1, b.p2, a.p2)
            if d1 * d2 < 0 and d3 * d4 < 0:
                t = d3 / (d3 - d4)
                x = a.p1[0] + t * (a.p2[0] - a.p1[0])
                y = a.p1[1] + t * (a.p2[1] - a.p1[1])
                if 0.0 <= x <= side and 0.0 <= y <= side:
                    pairs.add((a.id, b.id))
    return pairs


def _reachable(topology: NetworkTopology, start: int) -> set:
    edges = topology.edge_array()
    seen = {start}
    queue = deque([start])
    while queue:
        wire = queue.popleft()
        for jid in topology.adjacency[wire]:
            a, b = edges[jid]
            other = int(b if a == wire else a)
            if other not in seen:
                seen.add(other)
                queue.append(other)
    return seen


def _chain(ground_reaches: bool = True):
    top = 60.0 if ground_reaches else 40.0
    return [
        _wire(0, 0.0, 5.0, 40.0, 5.0),
        _wire(1, 30.0, 0.0, 30.0, top),
        _wire(2, 20.0, 50.0, 60.0, 50.0),
    ]


@pytest.mark.unit
class TestIntersect:
    def test_crossing(self):
        assert intersect(_wire(0, 0, 0, 2, 2), _wire(1, 0, 2, 2, 0)) == (1.0, 1.0)

    def test_parallel(self):
        assert intersect(_wire(0, 0, 0, 2, 0), _wire(1, 0, 1, 2, 1)) is None

    def test_collinear_overlap(self):
        assert intersect(_wire(0, 0, 0, 2, 0), _wire(1, 1, 0, 3, 0)) is None

    def test_endpoint_touch(self):
        assert intersect(_wire(0, 0, 0, 2, 0), _wire(1, 2, 0, 2, 2)) is None

    def test_disjoint(self):
        assert intersect(_wire(0, 0, 0, 1, 1), _wire(1, 5, 0, 6, -1)) is None


@pytest.mark.unit
class TestFindJunctions:
    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_matches_brute_force(self, seed):
        config = AssemblyConfig(n_wires=60, substrate_side=120.0)
        wires = sample_wires(config, seed)
        found = {(j.wire_a, j.wire_b) for j in find_junctions(wires, config.side)}
        assert found == _brute_force_pairs(wires, config.side)

    def test_ids_are_sequential(self):
        wires = sample_wires(AssemblyConfig(n_wires=60, substrate_side=120.0), 7)
        junctions = find_junctions(wires, 120.0)
        assert [j.id for j in junctions] == list(range(len(junctions)))
        assert all(j.wire_a < j.wire_b for j in junctions)

    def test_off_substrate_crossing_is_discarded(self):
        wires = [_wire(0, -20.0, 5.0, 10.0, 5.0), _wire(1, -5.0, 0.0, -5.0, 10.0)]
        assert find_junctions(wires, 100.0) == []

    def test_single_wire(self):
        assert find_junctions([_wire(0, 0, 0, 1, 1)], 10.0) == []


@pytest.mark.unit
class TestBuildTopology:
    def test_chain(self):
        topology = build_topology(_chain(), 60.0)
        assert (topology.source_wire, topology.ground_wire) == (0, 2)
        assert [(j.wire_a, j.wire_b) for j in topology.junctions] == [(0, 1), (1, 2)]
        assert topology.junctions[0].position == pytest.approx((30.0, 5.0))
        assert topology.adjacency == ((0,), (0, 1), (1,))

    def test_disconnected_chain(self):
        with pytest.raises(PercolationFailure) as info:
            build_topology(_chain(ground_reaches=False), 60.0)
        assert info.value.context["junctions"] == 1

    def test_electrodes_nearest_corners(self):
        wires = _chain()
        assert electrode_wires(wires, 60.0) == (0, 2)

    def test_explicit_electrodes_must_differ(self):
        with pytest.raises(InvalidArgument):
            build_topology(_chain(), 60.0, source=1, ground=1)


@pytest.mark.unit
class TestAssemble:
    def test_deterministic(self, small_assembly):
        assert assemble(small_assembly) == assemble(small_assembly)

    def test_source_reaches_ground(self, small_assembly):
        topology = assemble(small_assembly)
        assert topology.ground_wire in _reachable(topology, topology.source_wire)

    def test_wire_lengths_are_floored(self):
        config = AssemblyConfig(n_wires=500, mean_length=40.0, std_length=30.0)
        lengths = np.array([w.length for w in sample_wires(config, 0)])
        assert lengths.min() >= 4.0 - 1e-9

    def test_length_distribution_at_reference_scale(self):
        config = AssemblyConfig()
        samples = [np.array([w.length for w in sample_wires(config, seed)]) for seed in range(5)]
        mean = np.mean([s.mean() for s in samples])
        std = np.mean([s.std() for s in samples])
        assert mean == pytest.approx(40.0, rel=0.05)
        assert std == pytest.approx(14.0, rel=0.15)

    def test_centres_on_substrate(self, small_assembly):
        for wire in sample_wires(small_assembly, 5):
            x, y = wire.midpoint
            assert 0.0 <= x <= small_assembly.side and 0.0 <= y <= small_assembly.side

    def test_retry_budget_exhausted(self):
        config = AssemblyConfig(
            n_wires=2, mean_length=1.0, std_length=0.0, substrate_side=1000.0, max_retries=2
        )
        with pytest.raises(PercolationFailure) as info:
            assemble(config)
        assert info.value.context["retries"] == 2

    def test_invalid_config(self):
        with pytest.raises(InvalidArgument):
            assemble(AssemblyConfig(n_wires=1))

    def test_json_keeps_the_topology(self, small_assembly):
        topology = assemble(small_assembly)
        assert NetworkTopology.from_json(topology.to_json()) == topology
