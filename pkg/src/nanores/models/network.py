"""
Network data models for nanores.

Wires are straight segments on a square substrate; every wire is one circuit
node and every crossing one memristive junction.
"""

import json
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

Point = Tuple[float, float]


@dataclass(frozen=True)
class Nanowire:
    """Straight nanowire segment, coordinates in nm."""

    id: int
    p1: Point
    p2: Point

    def __post_init__(self):
        if self.p1 == self.p2:
            raise ValueError(f"wire {self.id} has zero length")

    @property
    def length(self) -> float:
        return float(np.hypot(self.p2[0] - self.p1[0], self.p2[1] - self.p1[1]))

    @property
    def midpoint(self) -> Point:
        return ((self.p1[0] + self.p2[0]) / 2.0, (self.p1[1] + self.p2[1]) / 2.0)


@dataclass(frozen=True)
class Junction:
    """Crossing of two wires."""

    id: int
    wire_a: int
    wire_b: int
    position: Point


@dataclass(frozen=True)
class NetworkTopology:
    """Immutable assembled network."""

    wires: Tuple[Nanowire, ...]
    junctions: Tuple[Junction, ...]
    source_wire: int
    ground_wire: int
    substrate_side: float
    seed: int
    adjacency: Tuple[Tuple[int, ...], ...]

    @property
    def n_wires(self) -> int:
        return len(self.wires)

    @property
    def n_junctions(self) -> int:
        return len(self.junctions)

    def edge_array(self) -> np.ndarray:
        """(n_junctions, 2) int array of (wire_a, wire_b)."""
        if not self.junctions:
            return np.zeros((0, 2), dtype=np.int64)
        return np.array([(j.wire_a, j.wire_b) for j in self.junctions], dtype=np.int64)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "substrate_side": self.substrate_side,
            "wires": [
                {"id": w.id, "x1": w.p1[0], "y1": w.p1[1], "x2": w.p2[0], "y2": w.p2[1]}
                for w in self.wires
            ],
            "junctions": [
                {"id": j.id, "a": j.wire_a, "b": j.wire_b, "x": j.position[0], "y": j.position[1]}
                for j in self.junctions
            ],
            "source": self.source_wire,
            "ground": self.ground_wire,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkTopology":
        wires = tuple(
            Nanowire(
                id=int(w["id"]),
                p1=(float(w["x1"]), float(w["y1"])),
                p2=(float(w["x2"]), float(w["y2"])),
            )
            for w in data["wires"]
        )
        junctions = tuple(
            Junction(
                id=int(j["id"]),
                wire_a=int(j["a"]),
                wire_b=int(j["b"]),
                position=(float(j["x"]), float(j["y"])),
            )
            for j in data["junctions"]
        )
        return cls(
            wires=wires,
            junctions=junctions,
            source_wire=int(data["source"]),
            ground_wire=int(data["ground"]),
            substrate_side=float(data["substrate_side"]),
            seed=int(data["seed"]),
            adjacency=build_adjacency(len(wires), junctions),
        )

    def to_json(self) -> str:
        # json writes floats with repr(), which round-trips exactly
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "NetworkTopology":
        return cls.from_dict(json.loads(text))


def build_adjacency(n_wires: int, junctions) -> Tuple[Tuple[int, ...], ...]:
    """Incident junction ids per wire."""
    incident: List[List[int]] = [[] for _ in range(n_wires)]
    for j in junctions:
        incident[j.wire_a].append(j.id)
        incident[j.wire_b].append(j.id)
    return tuple(tuple(ids) for ids in incident)

