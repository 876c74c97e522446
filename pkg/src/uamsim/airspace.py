"""Directed vertiport graph with composite arc costs.

Nodes are dense integer ids in ``[0, node_count)``. Each arc carries the
four cost constituents (corridor length, navigation unreliability,
collision risk, threat exposure); a :class:`CostWeights` instance turns
them into a single scalar via a weighted linear combination. Graphs are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Sequence, Tuple

from uamsim.errors import InvalidNode

Position = Tuple[float, float, float]


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class CostComponents:
    """Constituents of an arc's traversal cost.

    distance_km is the corridor length; nav_unreliability and
    collision_risk are dimensionless in [0, 1]; threat_exposure is a
    dimensionless non-negative exposure measure.
    """

    distance_km: float
    nav_unreliability: float = 0.0
    collision_risk: float = 0.0
    threat_exposure: float = 0.0

    def __post_init__(self):
        if _require_finite("distance_km", self.distance_km) < 0:
            raise ValueError(f"distance_km must be >= 0, got {self.distance_km}")
        for name in ("nav_unreliability", "collision_risk"):
            v = _require_finite(name, getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if _require_finite("threat_exposure", self.threat_exposure) < 0:
            raise ValueError(f"threat_exposure must be >= 0, got {self.threat_exposure}")


@dataclass(frozen=True)
class CostWeights:
    """Non-negative weights for the linear arc-cost combination."""

    w_dist: float = 1.0
    w_nav: float = 0.0
    w_risk: float = 0.0
    w_threat: float = 0.0

    def __post_init__(self):
        for name in ("w_dist", "w_nav", "w_risk", "w_threat"):
            if _require_finite(name, getattr(self, name)) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.w_dist == self.w_nav == self.w_risk == self.w_threat == 0.0:
            raise ValueError("at least one weight must be > 0")


@dataclass(frozen=True)
class Arc:
    """Directed arc from_node -> to_node with its cost components."""

    from_node: int
    to_node: int
    cost: CostComponents

    def __post_init__(self):
        if self.from_node < 0 or self.to_node < 0:
            raise ValueError("arc endpoints must be non-negative node ids")


def arc_cost(arc: Arc, weights: CostWeights) -> float:
    """Scalar cost of an arc: the weighted sum of its components."""
    c = arc.cost
    return (
        weights.w_dist * c.distance_km
        + weights.w_nav * c.nav_unreliability
        + weights.w_risk * c.collision_risk
        + weights.w_threat * c.threat_exposure
    )


@dataclass(frozen=True)
class Violation:
    """One broken graph invariant, with a JSON-pointer-style location."""

    rule: str
    location: str
    detail: str

    def __str__(self) -> str:
        return f"{self.location}: {self.rule}: {self.detail}"


class AirspaceGraph:
    """Immutable directed graph of vertiports/fueling stations.

    ``arcs`` keeps construction order. Adjacency queries raise
    :class:`InvalidNode` for node ids outside ``[0, node_count)``.
    Construction tolerates self-loops, duplicate ordered pairs and
    out-of-range endpoints so that :meth:`validate` can report them.
    """

    __slots__ = ("_node_count", "_arcs", "_positions", "_out", "_in")

    def __init__(
        self,
        node_count: int,
        arcs: Sequence[Arc],
        node_positions: Optional[Mapping[int, Position]] = None,
    ):
        if node_count < 0:
            raise ValueError("node_count must be >= 0")
        self._node_count = int(node_count)
        self._arcs: Tuple[Arc, ...] = tuple(arcs)
        self._positions = (
            None
            if node_positions is None
            else {int(k): (float(v[0]), float(v[1]), float(v[2])) for k, v in node_positions.items()}
        )
        out: dict = {i: [] for i in range(self._node_count)}
        inc: dict = {i: [] for i in range(self._node_count)}
        for arc in self._arcs:
            if arc.from_node < self._node_count:
                out[arc.from_node].append(arc)
            if arc.to_node < self._node_count:
                inc[arc.to_node].append(arc)
        self._out = {i: tuple(v) for i, v in out.items()}
        self._in = {i: tuple(v) for i, v in inc.items()}

    @property
    def node_count(self) -> int:
        return self._node_count

    @property
    def arcs(self) -> Tuple[Arc, ...]:
        return self._arcs

    @property
    def has_positions(self) -> bool:
        return self._positions is not None

    def position(self, node: int) -> Position:
        self._check_node(node)
        if self._positions is None or node not in self._positions:
            raise KeyError(f"node {node} has no position")
        return self._positions[node]

    def nodes(self) -> Iterator[int]:
        return iter(range(self._node_count))

    def _check_node(self, node: int) -> None:
        if not 0 <= node < self._node_count:
            raise InvalidNode(f"node {node} not in [0, {self._node_count})")

    def out_arcs(self, node: int) -> Tuple[Arc, ...]:
        """Arcs leaving ``node``."""
        self._check_node(node)
        return self._out[node]

    def in_arcs(self, node: int) -> Tuple[Arc, ...]:
        """Arcs entering ``node``."""
        self._check_node(node)
        return self._in[node]

    def validate(self) -> list:
        """Report all broken invariants; empty list means well-formed."""
        violations = []
        seen: set = set()
        for idx, arc in enumerate(self._arcs):
            loc = f"/arcs/{idx}"
            if arc.from_node == arc.to_node:
                violations.append(
                    Violation("SelfLoop", loc, f"arc {arc.from_node}->{arc.to_node}")
                )
            if arc.from_node >= self._node_count or arc.to_node >= self._node_count:
                violations.append(
                    Violation(
                        "EndpointOutOfRange",
                        loc,
                        f"arc {arc.from_node}->{arc.to_node} with node_count {self._node_count}",
                    )
                )
            pair = (arc.from_node, arc.to_node)
            if pair in seen:
                violations.append(
                    Violation("DuplicateArc", loc, f"second arc {pair[0]}->{pair[1]}")
                )
            seen.add(pair)
        if self._positions is not None:
            for node in sorted(self._positions):
                if not 0 <= node < self._node_count:
                    violations.append(
                        Violation("PositionForUnknownNode", f"/nodes/{node}", f"node {node}")
                    )
        return violations


def graph_to_dict(graph: AirspaceGraph) -> dict:
    """Serialize to the scenario-file graph section (JSON-compatible)."""
    nodes = []
    for i in graph.nodes():
        entry: dict = {"id": i}
        if graph.has_positions:
            try:
                x, y, z = graph.position(i)
            except KeyError:
                pass
            else:
                entry.update({"x": x, "y": y, "z": z})
        nodes.append(entry)
    arcs = [
        {
            "from": a.from_node,
            "to": a.to_node,
            "distance_km": a.cost.distance_km,
            "nav_unreliability": a.cost.nav_unreliability,
            "collision_risk": a.cost.collision_risk,
            "threat_exposure": a.cost.threat_exposure,
        }
        for a in graph.arcs
    ]
    return {"nodes": nodes, "arcs": arcs}


def graph_from_dict(data: Mapping) -> AirspaceGraph:
    """Inverse of :func:`graph_to_dict`; round-trips bit-exactly."""
    nodes = data["nodes"]
    node_count = len(nodes)
    positions = {}
    for entry in nodes:
        if "x" in entry:
            positions[int(entry["id"])] = (
                float(entry["x"]),
                float(entry.get("y", 0.0)),
                float(entry.get("z", 0.0)),
            )
    arcs = [
        Arc(
            from_node=int(e["from"]),
            to_node=int(e["to"]),
            cost=CostComponents(
                distance_km=float(e["distance_km"]),
                nav_unreliability=float(e.get("nav_unreliability", 0.0)),
                collision_risk=float(e.get("collision_risk", 0.0)),
                threat_exposure=float(e.get("threat_exposure", 0.0)),
            ),
        )
        for e in data["arcs"]
    ]
    return AirspaceGraph(node_count, arcs, positions or None)
