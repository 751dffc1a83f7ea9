"""Random network geometry in a vertical (x, depth) plane.

Node ids are integers: sensors ``0..M`` (sensor 0 is the source), the sink
is ``M+1`` and Eve is ``M+2``.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, GenerationError

MIN_PROPAGATION_DISTANCE = 1.0
DEFAULT_REGION = (5000.0, 5000.0)
DEFAULT_MAX_RANGE = 2000.0
DEFAULT_EVE_EXCLUSION = 500.0
MAX_EVE_ATTEMPTS = 10_000


class NodeKind(str, enum.Enum):
    SENSOR = "Sensor"
    SINK = "Sink"
    EVE = "Eve"


@dataclass(frozen=True, order=True)
class NodeId:
    index: int
    kind: NodeKind

    def __str__(self):
        if self.kind is NodeKind.SENSOR:
            return f"A{self.index}"
        return "S" if self.kind is NodeKind.SINK else "E"


@dataclass(frozen=True)
class NetworkTopology:
    x: np.ndarray
    depth: np.ndarray
    region: tuple[float, float]
    seed: int | None = None
    source: int = 0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        depth = np.asarray(self.depth, dtype=float)
        if x.shape != depth.shape or x.ndim != 1 or x.size < 4:
            raise ContractError("need matching x/depth arrays with >= 2 sensors, a sink and Eve")
        for a in (x, depth):
            a.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "depth", depth)
        object.__setattr__(self, "region", (float(self.region[0]), float(self.region[1])))
        if depth[self.sink.index] != 0.0:
            raise ContractError("sink must sit on the surface")
        if np.any(depth < 0):
            raise ContractError("depths must be non-negative")

    @property
    def n_sensors(self) -> int:
        return self.x.size - 2

    @property
    def sink(self) -> NodeId:
        return NodeId(self.x.size - 2, NodeKind.SINK)

    @property
    def eve(self) -> NodeId:
        return NodeId(self.x.size - 1, NodeKind.EVE)

    @property
    def source_id(self) -> NodeId:
        return NodeId(self.source, NodeKind.SENSOR)

    @property
    def nodes(self) -> list[NodeId]:
        return [self.node(i) for i in range(self.x.size)]

    def node(self, index: int) -> NodeId:
        index = int(index)
        if not 0 <= index < self.x.size:
            raise KeyError(f"unknown node index {index}")
        if index < self.n_sensors:
            return NodeId(index, NodeKind.SENSOR)
        return self.sink if index == self.sink.index else self.eve

    def _index(self, node) -> int:
        idx = node.index if isinstance(node, NodeId) else int(node)
        if not 0 <= idx < self.x.size:
            raise KeyError(f"unknown node {node}")
        if isinstance(node, NodeId) and self.node(idx) != node:
            raise KeyError(f"node {node} does not belong to this topology")
        return idx

    def depth_of(self, node) -> float:
        return float(self.depth[self._index(node)])

    def distance(self, a, b) -> float:
        """Euclidean distance in metres (unclamped)."""
        i, j = self._index(a), self._index(b)
        return float(np.hypot(self.x[i] - self.x[j], self.depth[i] - self.depth[j]))

    def propagation_distance(self, a, b) -> float:
        return max(self.distance(a, b), MIN_PROPAGATION_DISTANCE)

    def distances_from(self, a) -> np.ndarray:
        i = self._index(a)
        return np.hypot(self.x - self.x[i], self.depth - self.depth[i])

    def candidates(self, sender, max_range: float = DEFAULT_MAX_RANGE,
                   visited=()) -> list[NodeId]:
        """Shallower, in-range, non-Eve nodes a sender may forward to, by index."""
        s = self._index(sender)
        if self.node(s).kind is not NodeKind.SENSOR:
            raise ContractError("only sensor nodes forward data")
        skip = {self._index(v) for v in visited} | {s, self.eve.index}
        d = self.distances_from(s)
        ok = (d <= max_range) & (self.depth < self.depth[s])
        return [self.node(i) for i in np.flatnonzero(ok) if i not in skip]

    def to_dict(self) -> dict:
        nodes = [
            {"id": n.index, "kind": n.kind.value, "x": float(self.x[n.index]),
             "depth": float(self.depth[n.index])}
            for n in self.nodes
        ]
        return {"seed": self.seed, "region": list(self.region), "source": self.source,
                "nodes": nodes}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, doc: dict) -> "NetworkTopology":
        nodes = sorted(doc["nodes"], key=lambda n: n["id"])
        if [n["id"] for n in nodes] != list(range(len(nodes))):
            raise ContractError("node ids must be contiguous from 0")
        kinds = [NodeKind(n["kind"]) for n in nodes]
        expected = [NodeKind.SENSOR] * (len(nodes) - 2) + [NodeKind.SINK, NodeKind.EVE]
        if kinds != expected:
            raise ContractError("nodes must be sensors, then the sink, then Eve")
        return cls(
            x=np.array([n["x"] for n in nodes]),
            depth=np.array([n["depth"] for n in nodes]),
            region=tuple(doc["region"]),
            seed=doc.get("seed"),
            source=int(doc.get("source", 0)),
        )

    @classmethod
    def from_json(cls, text: str) -> "NetworkTopology":
        return cls.from_dict(json.loads(text))


def generate(m_plus_1: int, region=DEFAULT_REGION, seed: int = 0,
             eve_exclusion_radius: float = DEFAULT_EVE_EXCLUSION,
             sink_x: float | None = None) -> NetworkTopology:
    """Drop ``m_plus_1`` sensors and Eve uniformly over ``region`` (width, height).

    The sink sits on the surface at ``sink_x`` (horizontal centre by default).
    Eve is redrawn until it lies at least ``eve_exclusion_radius`` from the sink.
    """
    width, height = float(region[0]), float(region[1])
    if m_plus_1 < 2:
        raise ContractError("need at least two sensors")
    if not (width > 0 and height > 0):
        raise ContractError("region must have positive extent")
    if not 0 < eve_exclusion_radius < np.hypot(width, height):
        raise ContractError("exclusion radius must be positive and below the region diagonal")
    rng = np.random.default_rng(seed)
    sx = width / 2.0 if sink_x is None else float(sink_x)
    xs = rng.uniform(0.0, width, m_plus_1)
    ds = rng.uniform(0.0, height, m_plus_1)
    for _ in range(MAX_EVE_ATTEMPTS):
        ex, ed = rng.uniform(0.0, width), rng.uniform(0.0, height)
        if np.hypot(ex - sx, ed) >= eve_exclusion_radius:
            break
    else:
        raise GenerationError(f"could not place Eve outside {eve_exclusion_radius} m of the sink")
    return NetworkTopology(
        x=np.concatenate([xs, [sx, ex]]),
        depth=np.concatenate([ds, [0.0, ed]]),
        region=(width, height),
        seed=seed,
    )
