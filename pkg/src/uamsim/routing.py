"""Route optimization over the vertiport graph.

Three planning layers:

* single origin/destination shortest path (label-setting on non-negative
  composite costs, with the integer-program constraints asserted on the
  returned arc selection),
* exact and heuristic asymmetric TSP tours over a dense cost matrix
  (subset dynamic programming, nearest-neighbor + relocate/swap moves),
* the Noon-Bean reduction from clustered (generalized) TSP instances to
  plain asymmetric TSP, with recovery of the clustered tour.

All solvers are deterministic: ties break toward the lowest node index
and any randomness flows from an explicit seed.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from uamsim import _kernels
from uamsim.airspace import AirspaceGraph, Arc, CostWeights, arc_cost
from uamsim.errors import (
    ConstructionError,
    EmptyCluster,
    Infeasible,
    InvalidNode,
    NoPath,
    TooLarge,
)

HELD_KARP_MAX_NODES = 14
ORACLE_MAX_NODES = 10
BRUTE_FORCE_MAX_NODES = 8


@dataclass(frozen=True)
class PathQuery:
    source: int
    destination: int
    weights: CostWeights = field(default_factory=CostWeights)


@dataclass(frozen=True)
class PathResult:
    """A simple source->destination path as an ordered arc sequence."""

    arcs: Tuple[Arc, ...]
    visited: Tuple[int, ...]
    total_cost: float

    def __post_init__(self):
        for prev, nxt in zip(self.arcs, self.arcs[1:]):
            if prev.to_node != nxt.from_node:
                raise ValueError("arcs do not chain head-to-tail")
        if len(set(self.visited)) != len(self.visited):
            raise ValueError("path revisits a node")


@dataclass(frozen=True)
class TourResult:
    """Closed tour starting at a depot; the return arc is implicit."""

    order: Tuple[int, ...]
    total_cost: float
    exact: bool

    def closed(self) -> Tuple[int, ...]:
        return self.order + (self.order[0],)

    def edges(self) -> Tuple[Tuple[int, int], ...]:
        closed = self.closed()
        return tuple(zip(closed, closed[1:]))


def tour_cost(matrix: np.ndarray, order: Sequence[int]) -> float:
    """Total cost of a closed tour given as a node order."""
    total = 0.0
    n = len(order)
    for i in range(n):
        total += float(matrix[order[i], order[(i + 1) % n]])
    return total


def path_arc_indicators(result: PathResult) -> Dict[Tuple[int, int], int]:
    """Arc selection X_ij of a path (1 on used arcs, absent otherwise)."""
    return {(a.from_node, a.to_node): 1 for a in result.arcs}


def verify_path_constraints(
    graph: AirspaceGraph, result: PathResult, source: int, destination: int
) -> bool:
    """Check the routing IP constraints on a path's arc selection.

    Flow balance must be +1 at the source, -1 at the destination and 0
    elsewhere (source == destination degenerates to all zero), and no
    node may have more than one outgoing selected arc.
    """
    x = path_arc_indicators(result)
    for i in graph.nodes():
        out_flow = sum(x.get((a.from_node, a.to_node), 0) for a in graph.out_arcs(i))
        in_flow = sum(x.get((a.from_node, a.to_node), 0) for a in graph.in_arcs(i))
        if source == destination:
            expected = 0
        elif i == source:
            expected = 1
        elif i == destination:
            expected = -1
        else:
            expected = 0
        if out_flow - in_flow != expected:
            return False
        if out_flow > 1:
            return False
    return True


def shortest_path(graph: AirspaceGraph, query: PathQuery) -> PathResult:
    """Minimum-cost path under the composite arc cost.

    Label-setting search; exact because weights and cost components are
    non-negative. The flow-conservation and out-degree constraints are
    asserted on the solution before returning.
    """
    s, d = query.source, query.destination
    for node in (s, d):
        if not 0 <= node < graph.node_count:
            raise InvalidNode(f"node {node} not in [0, {graph.node_count})")
    if s == d:
        return PathResult(arcs=(), visited=(s,), total_cost=0.0)

    dist = {s: 0.0}
    prev_arc: Dict[int, Arc] = {}
    done = set()
    heap = [(0.0, s)]
    while heap:
        cost, node = heapq.heappop(heap)
        if node in done:
            continue
        done.add(node)
        if node == d:
            break
        for arc in graph.out_arcs(node):
            cand = cost + arc_cost(arc, query.weights)
            if cand < dist.get(arc.to_node, math.inf):
                dist[arc.to_node] = cand
                prev_arc[arc.to_node] = arc
                heapq.heappush(heap, (cand, arc.to_node))
    if d not in done:
        raise NoPath(f"no path from {s} to {d}")

    arcs = []
    node = d
    while node != s:
        arc = prev_arc[node]
        arcs.append(arc)
        node = arc.from_node
    arcs.reverse()
    result = PathResult(
        arcs=tuple(arcs),
        visited=(s,) + tuple(a.to_node for a in arcs),
        total_cost=dist[d],
    )
    assert verify_path_constraints(graph, result, s, d)
    return result


def shortest_path_oracle(graph: AirspaceGraph, query: PathQuery) -> PathResult:
    """Exhaustive enumeration of all simple paths; test oracle only."""
    if graph.node_count > ORACLE_MAX_NODES:
        raise TooLarge(
            f"oracle limited to {ORACLE_MAX_NODES} nodes, got {graph.node_count}"
        )
    s, d = query.source, query.destination
    for node in (s, d):
        if not 0 <= node < graph.node_count:
            raise InvalidNode(f"node {node} not in [0, {graph.node_count})")
    if s == d:
        return PathResult(arcs=(), visited=(s,), total_cost=0.0)

    best: Optional[PathResult] = None

    def extend(node: int, arcs: list, cost: float, seen: set):
        nonlocal best
        if node == d:
            if best is None or cost < best.total_cost:
                best = PathResult(
                    arcs=tuple(arcs),
                    visited=(s,) + tuple(a.to_node for a in arcs),
                    total_cost=cost,
                )
            return
        for arc in graph.out_arcs(node):
            if arc.to_node in seen:
                continue
            seen.add(arc.to_node)
            arcs.append(arc)
            extend(arc.to_node, arcs, cost + arc_cost(arc, query.weights), seen)
            arcs.pop()
            seen.remove(arc.to_node)

    extend(s, [], 0.0, {s})
    if best is None:
        raise NoPath(f"no path from {s} to {d}")
    return best


def _as_matrix(cost_matrix) -> np.ndarray:
    c = np.asarray(cost_matrix, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {c.shape}")
    if np.isnan(c).any():
        raise ValueError("cost matrix contains NaN")
    return c


def _relabel_for_depot(n: int, depot: int) -> np.ndarray:
    if not 0 <= depot < n:
        raise InvalidNode(f"depot {depot} not in [0, {n})")
    return np.array([depot] + [i for i in range(n) if i != depot], dtype=np.int64)


def atsp_exact(cost_matrix, depot: int = 0) -> TourResult:
    """Provably minimal closed tour via dynamic programming over subsets.

    Every vertex is visited exactly once (in-degree = out-degree = 1 in
    the induced arc selection) and the tour is a single cycle by
    construction. Guarded to n <= 14.
    """
    c = _as_matrix(cost_matrix)
    n = c.shape[0]
    if n < 2:
        raise ValueError("tour needs at least 2 nodes")
    if n > HELD_KARP_MAX_NODES:
        raise TooLarge(f"exact solver limited to {HELD_KARP_MAX_NODES} nodes, got {n}")
    perm = _relabel_for_depot(n, depot)
    cost, order = _kernels.held_karp(c[np.ix_(perm, perm)])
    if not math.isfinite(cost):
        raise Infeasible("no feasible tour: required arcs are missing")
    return TourResult(
        order=tuple(int(perm[i]) for i in order), total_cost=float(cost), exact=True
    )


def atsp_oracle(cost_matrix, depot: int = 0) -> TourResult:
    """Brute-force permutation minimum; independent check for the exact solver."""
    c = _as_matrix(cost_matrix)
    n = c.shape[0]
    if n < 2:
        raise ValueError("tour needs at least 2 nodes")
    if n > BRUTE_FORCE_MAX_NODES:
        raise TooLarge(
            f"brute force limited to {BRUTE_FORCE_MAX_NODES} nodes, got {n}"
        )
    others = [i for i in range(n) if i != depot]
    best_cost = math.inf
    best_order: Optional[Tuple[int, ...]] = None
    for perm in itertools.permutations(others):
        order = (depot,) + perm
        cost = tour_cost(c, order)
        if cost < best_cost:
            best_cost = cost
            best_order = order
    if best_order is None or not math.isfinite(best_cost):
        raise Infeasible("no feasible tour: required arcs are missing")
    return TourResult(order=best_order, total_cost=best_cost, exact=True)


def _nearest_neighbor_order(c: np.ndarray, depot: int) -> list:
    n = c.shape[0]
    order = [depot]
    remaining = [i for i in range(n) if i != depot]
    current = depot
    while remaining:
        best = remaining[0]
        best_cost = c[current, best]
        for node in remaining[1:]:
            if c[current, node] < best_cost:
                best_cost = c[current, node]
                best = node
        order.append(best)
        remaining.remove(best)
        current = best
    return order


def _local_improve(c: np.ndarray, order: list) -> Tuple[list, float]:
    """First-improvement relocate (segment length 1-3) and pair-swap moves.

    Segment reversal is never used; it is invalid under asymmetric costs.
    """
    n = len(order)
    best_cost = tour_cost(c, order)
    improved = True
    while improved:
        improved = False
        for seg_len in (1, 2, 3):
            if seg_len >= n - 1:
                continue
            for i in range(1, n - seg_len + 1):
                segment = order[i : i + seg_len]
                rest = order[:i] + order[i + seg_len :]
                for pos in range(1, len(rest) + 1):
                    if pos == i:
                        continue
                    candidate = rest[:pos] + segment + rest[pos:]
                    cand_cost = tour_cost(c, candidate)
                    if cand_cost < best_cost - 1e-12:
                        order = candidate
                        best_cost = cand_cost
                        improved = True
                        break
                if improved:
                    break
            if improved:
                break
        if improved:
            continue
        for i in range(1, n - 1):
            for j in range(i + 1, n):
                candidate = list(order)
                candidate[i], candidate[j] = candidate[j], candidate[i]
                cand_cost = tour_cost(c, candidate)
                if cand_cost < best_cost - 1e-12:
                    order = candidate
                    best_cost = cand_cost
                    improved = True
                    break
            if improved:
                break
    return order, best_cost


def atsp_heuristic(cost_matrix, depot: int = 0, seed: int = 0, restarts: int = 2) -> TourResult:
    """Nearest-neighbor tour plus relocate/swap descent to a local optimum.

    ``restarts`` extra seeded random starts are improved the same way and
    the cheapest local optimum wins. Deterministic given ``seed``; never
    cheaper than the exact optimum.
    """
    c = _as_matrix(cost_matrix)
    n = c.shape[0]
    if n < 2:
        raise ValueError("tour needs at least 2 nodes")
    perm = _relabel_for_depot(n, depot)

    starts = [_nearest_neighbor_order(c[np.ix_(perm, perm)], 0)]
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        shuffled = list(rng.permutation(np.arange(1, n)))
        starts.append([0] + [int(v) for v in shuffled])

    best_order: Optional[list] = None
    best_cost = math.inf
    sub = c[np.ix_(perm, perm)]
    for start in starts:
        order, cost = _local_improve(sub, start)
        if cost < best_cost:
            best_cost = cost
            best_order = order
    if best_order is None or not math.isfinite(best_cost):
        raise Infeasible("no feasible tour: required arcs are missing")
    return TourResult(
        order=tuple(int(perm[i]) for i in best_order),
        total_cost=best_cost,
        exact=False,
    )


@dataclass(frozen=True)
class GtspInstance:
    """Clustered tour instance: visit exactly one node of every cluster."""

    clusters: Tuple[Tuple[int, ...], ...]
    costs: np.ndarray

    def __post_init__(self):
        c = _as_matrix(self.costs)
        object.__setattr__(self, "costs", c)
        n = c.shape[0]
        seen: set = set()
        for ci, cluster in enumerate(self.clusters):
            if len(cluster) == 0:
                raise EmptyCluster(f"cluster {ci} is empty")
            for node in cluster:
                if not 0 <= node < n:
                    raise InvalidNode(f"cluster node {node} not in [0, {n})")
                if node in seen:
                    raise ValueError(f"node {node} appears in two clusters")
                seen.add(node)
        if len(seen) != n:
            raise ValueError("clusters must cover all nodes")

    @property
    def node_count(self) -> int:
        return self.costs.shape[0]

    def cluster_of(self) -> np.ndarray:
        labels = np.empty(self.node_count, dtype=np.int64)
        for ci, cluster in enumerate(self.clusters):
            for node in cluster:
                labels[node] = ci
        return labels


class NoonBeanResult:
    """Transformed asymmetric-TSP instance plus the tour back-mapping."""

    def __init__(self, instance: GtspInstance, cost_matrix: np.ndarray, penalty: float,
                 successor: np.ndarray):
        self.instance = instance
        self.cost_matrix = cost_matrix
        self.penalty = penalty
        self.successor = successor

    def back_map(self, order: Sequence[int]) -> Tuple[Tuple[int, ...], float]:
        """Recover a cluster-visiting tour from a tour on the transformed nodes.

        The entry node of each cluster (the node whose cyclic predecessor
        in the tour sits in a different cluster) is that cluster's chosen
        representative; cost is re-evaluated on the original matrix.
        """
        labels = self.instance.cluster_of()
        n = len(order)
        reps = []
        seen_clusters = set()
        for idx in range(n):
            node = order[idx]
            pred = order[idx - 1]
            if labels[node] != labels[pred] and labels[node] not in seen_clusters:
                reps.append(int(node))
                seen_clusters.add(int(labels[node]))
        if len(reps) != len(self.instance.clusters):
            # Degenerate tours (never optimal under the penalty) may enter
            # some cluster twice without entering another; fall back to the
            # first-visited node per cluster.
            reps = []
            seen_clusters = set()
            for node in order:
                ci = int(labels[node])
                if ci not in seen_clusters:
                    reps.append(int(node))
                    seen_clusters.add(ci)
        cost = tour_cost(self.instance.costs, reps)
        return tuple(reps), float(cost)


def noon_bean(instance: GtspInstance, penalty: Optional[float] = None) -> NoonBeanResult:
    """Reduce a clustered tour instance to an equivalent asymmetric TSP.

    Nodes of each cluster are chained into a zero-cost directed cycle (in
    ascending node order); every original inter-cluster arc (i, j) is
    re-attached to the cyclic predecessor of i and offset by a penalty
    larger than the total cost mass, which forces optimal tours to sweep
    each cluster consecutively. The optimal clustered cost equals the
    transformed optimum minus one penalty per cluster.
    """
    if len(instance.clusters) < 2:
        raise ValueError("need at least 2 clusters")
    c = instance.costs
    n = instance.node_count
    labels = instance.cluster_of()

    finite_mask = np.isfinite(c) & ~np.eye(n, dtype=bool)
    inter_mask = finite_mask & (labels[:, None] != labels[None, :])
    total_mass = float(np.abs(c[inter_mask]).sum())
    if penalty is None:
        penalty = 1.0 + total_mass
    elif penalty <= total_mass:
        raise ConstructionError(
            f"penalty {penalty} must exceed total cost mass {total_mass}"
        )

    successor = np.arange(n, dtype=np.int64)
    for cluster in instance.clusters:
        ring = sorted(cluster)
        for a, b in zip(ring, ring[1:] + ring[:1]):
            successor[a] = b

    m = np.full((n, n), math.inf)
    for cluster in instance.clusters:
        if len(cluster) >= 2:
            ring = sorted(cluster)
            for a, b in zip(ring, ring[1:] + ring[:1]):
                m[a, b] = 0.0
    for u in range(n):
        src = successor[u]  # the cluster node whose departures u inherits
        for j in range(n):
            if labels[j] == labels[u]:
                continue
            if math.isfinite(c[src, j]):
                m[u, j] = c[src, j] + penalty
    return NoonBeanResult(instance, m, float(penalty), successor)


def gtsp_oracle(instance: GtspInstance) -> Tuple[Tuple[int, ...], float]:
    """Brute force over representative choices and visiting orders."""
    clusters = instance.clusters
    mcount = len(clusters)
    best_cost = math.inf
    best: Optional[Tuple[int, ...]] = None
    for reps in itertools.product(*clusters):
        for perm in itertools.permutations(range(1, mcount)):
            order = (reps[0],) + tuple(reps[p] for p in perm)
            cost = tour_cost(instance.costs, order)
            if cost < best_cost:
                best_cost = cost
                best = order
    if best is None or not math.isfinite(best_cost):
        raise Infeasible("no feasible clustered tour")
    return best, best_cost


@dataclass(frozen=True)
class MissionPlan:
    """Planned multi-target mission: visiting order plus per-leg paths."""

    visit_order: Tuple[int, ...]
    legs: Tuple[PathResult, ...]
    total_cost: float
    exact: bool


def plan_mission(
    graph: AirspaceGraph,
    depot: int,
    targets: Sequence[int],
    weights: CostWeights = CostWeights(),
    exact: Optional[bool] = None,
    seed: int = 0,
) -> MissionPlan:
    """Depot tour through all targets, built from shortest-path legs.

    Pairwise leg costs come from :func:`shortest_path`; the visiting
    order is the exact tour when the instance fits the solver guard
    (or ``exact=True`` forces it), else the heuristic tour. Total
    mission cost equals the tour cost over the leg matrix.
    """
    targets = tuple(targets)
    for node in (depot, *targets):
        if not 0 <= node < graph.node_count:
            raise InvalidNode(f"node {node} not in [0, {graph.node_count})")
    if len(set(targets)) != len(targets) or depot in targets:
        raise ValueError("targets must be distinct and different from the depot")
    if not targets:
        return MissionPlan(visit_order=(depot,), legs=(), total_cost=0.0, exact=True)

    stops = (depot,) + targets
    k = len(stops)
    matrix = np.full((k, k), math.inf)
    leg_paths: Dict[Tuple[int, int], PathResult] = {}
    for i, a in enumerate(stops):
        for j, b in enumerate(stops):
            if i == j:
                continue
            try:
                path = shortest_path(graph, PathQuery(a, b, weights))
            except NoPath:
                raise NoPath(f"target {b} unreachable from {a}") from None
            matrix[i, j] = path.total_cost
            leg_paths[(i, j)] = path

    if k == 2:
        tour = TourResult(order=(0, 1), total_cost=matrix[0, 1] + matrix[1, 0], exact=True)
    elif exact is True:
        tour = atsp_exact(matrix, depot=0)
    elif exact is False:
        tour = atsp_heuristic(matrix, depot=0, seed=seed)
    elif k <= HELD_KARP_MAX_NODES:
        tour = atsp_exact(matrix, depot=0)
    else:
        tour = atsp_heuristic(matrix, depot=0, seed=seed)

    legs = tuple(leg_paths[(i, j)] for i, j in tour.edges())
    return MissionPlan(
        visit_order=tuple(stops[i] for i in tour.order),
        legs=legs,
        total_cost=tour.total_cost,
        exact=tour.exact,
    )
