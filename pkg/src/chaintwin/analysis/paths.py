"""Shortest-path algorithms over snapshots.

Three interchangeable routes to the same answer on clean inputs, each with
its own niche: Dijkstra for non-negative weights (cheapest single pair),
Bellman-Ford when negative weights may be present (returns a negative-cycle
certificate instead of looping forever), Floyd-Warshall for all pairs at
once on dense desk-scale graphs.

Paths are deterministic: among equal-weight shortest paths the
lexicographically smallest edge-id sequence wins.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from ..errors import NegativeCycleDetected, NegativeWeightPresent, UnknownNode
from ..graph.snapshot import GraphSnapshot
from ..graph.types import LayerKind

PATH_WEIGHT_KEYS = ("cost_per_unit", "transit_time", "carbon_per_unit")


@dataclass
class PathResult:
    src: str
    dst: str
    total_weight: float
    edges: list[str]
    reachable: bool

    def to_dict(self) -> dict:
        return {"src": self.src, "dst": self.dst,
                "total_weight": self.total_weight, "edges": self.edges,
                "reachable": self.reachable}


def _edge_weight(edge, weight_key: str) -> float:
    return float(getattr(edge.weights, weight_key))


def _edges_for(snapshot: GraphSnapshot, layer: LayerKind | None):
    return snapshot.layer_edges(layer)


def shortest_path_dijkstra(snapshot: GraphSnapshot, src: str, dst: str,
                           weight_key: str = "cost_per_unit",
                           layer: LayerKind | None = LayerKind.MATERIAL
                           ) -> PathResult:
    """Cheapest path under a non-negative weight key.

    Heap keys are (distance, edge-id path), so the first settlement of a
    node carries both the minimal distance and the lex-smallest path.
    """
    for nid in (src, dst):
        if nid not in snapshot.nodes:
            raise UnknownNode(f"node {nid!r} not in snapshot")
    edges = _edges_for(snapshot, layer)
    for e in edges:
        if _edge_weight(e, weight_key) < 0:
            raise NegativeWeightPresent(
                f"edge {e.id!r} has negative {weight_key}; use Bellman-Ford")
    out_adj: dict[str, list] = {}
    for e in edges:
        out_adj.setdefault(e.src, []).append(e)
    heap: list[tuple[float, tuple[str, ...], str]] = [(0.0, (), src)]
    settled: set[str] = set()
    while heap:
        dist, path, nid = heapq.heappop(heap)
        if nid in settled:
            continue
        settled.add(nid)
        if nid == dst:
            return PathResult(src=src, dst=dst, total_weight=dist,
                              edges=list(path), reachable=True)
        for e in sorted(out_adj.get(nid, []), key=lambda e: e.id):
            if e.dst in settled:
                continue
            heapq.heappush(heap, (dist + _edge_weight(e, weight_key),
                                  path + (e.id,), e.dst))
    return PathResult(src=src, dst=dst, total_weight=float("inf"),
                      edges=[], reachable=False)


@dataclass
class BellmanFordResult:
    src: str
    distances: dict[str, float]          # reachable nodes only
    predecessor_edge: dict[str, str]
    negative_cycle: list[str] | None = None  # edge ids, in cycle order

    @property
    def has_negative_cycle(self) -> bool:
        return self.negative_cycle is not None


def shortest_path_bellman_ford(snapshot: GraphSnapshot, src: str,
                               weight_key: str = "cost_per_unit",
                               layer: LayerKind | None = LayerKind.MATERIAL
                               ) -> BellmanFordResult:
    """Single-source distances tolerant of negative weights.

    If a negative cycle is reachable from src, returns a certificate: the
    edge ids of one such cycle (their weights sum below zero).
    """
    if src not in snapshot.nodes:
        raise UnknownNode(f"node {src!r} not in snapshot")
    edges = sorted(_edges_for(snapshot, layer), key=lambda e: e.id)
    dist: dict[str, float] = {src: 0.0}
    pred: dict[str, str] = {}  # node -> incoming edge id on best path
    n = len(snapshot.nodes)
    for _ in range(max(0, n - 1)):
        changed = False
        for e in edges:
            if e.src in dist:
                cand = dist[e.src] + _edge_weight(e, weight_key)
                if cand < dist.get(e.dst, float("inf")) - 1e-15:
                    dist[e.dst] = cand
                    pred[e.dst] = e.id
                    changed = True
        if not changed:
            break
    # one more pass: any further relaxation exposes a negative cycle
    for e in edges:
        if e.src in dist:
            cand = dist[e.src] + _edge_weight(e, weight_key)
            if cand < dist.get(e.dst, float("inf")) - 1e-15:
                cycle = _extract_cycle(snapshot, pred, e)
                return BellmanFordResult(src=src, distances={}, predecessor_edge={},
                                         negative_cycle=cycle)
    return BellmanFordResult(src=src, distances=dist, predecessor_edge=pred)


def _extract_cycle(snapshot: GraphSnapshot, pred: dict[str, str], seed_edge
                   ) -> list[str]:
    # walk predecessors n times to guarantee landing inside the cycle
    pred = dict(pred)
    pred[seed_edge.dst] = seed_edge.id
    node = seed_edge.dst
    for _ in range(len(snapshot.nodes)):
        node = snapshot.edges[pred[node]].src
    cycle_edges: list[str] = []
    start = node
    while True:
        eid = pred[node]
        cycle_edges.append(eid)
        node = snapshot.edges[eid].src
        if node == start:
            break
    cycle_edges.reverse()
    return cycle_edges


@dataclass
class FloydWarshallResult:
    node_ids: list[str]
    dist: np.ndarray                      # (n, n) float64
    next_hop: np.ndarray                  # (n, n) int, -1 = none
    edge_choice: dict[tuple[int, int], str] = field(default_factory=dict)

    def index(self, node_id: str) -> int:
        return self.node_ids.index(node_id)

    def distance(self, src: str, dst: str) -> float:
        return float(self.dist[self.index(src), self.index(dst)])

    def reconstruct(self, src: str, dst: str) -> list[str]:
        """Edge-id path reproducing the matrix distance."""
        i, j = self.index(src), self.index(dst)
        if i == j:
            return []
        if self.next_hop[i, j] < 0:
            return []
        path = []
        while i != j:
            k = int(self.next_hop[i, j])
            path.append(self.edge_choice[(i, k)])
            i = k
        return path


def all_pairs_floyd_warshall(snapshot: GraphSnapshot,
                             weight_key: str = "cost_per_unit",
                             layer: LayerKind | None = LayerKind.MATERIAL
                             ) -> FloydWarshallResult:
    """All-pairs distances with next-hop reconstruction (vectorized).

    Raises NegativeCycleDetected (naming an offending node) if any diagonal
    entry drops below zero.
    """
    node_ids = snapshot.node_ids()
    n = len(node_ids)
    idx = {nid: i for i, nid in enumerate(node_ids)}
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    next_hop = np.full((n, n), -1, dtype=np.int64)
    edge_choice: dict[tuple[int, int], str] = {}
    for e in sorted(_edges_for(snapshot, layer), key=lambda e: e.id):
        i, j = idx[e.src], idx[e.dst]
        w = _edge_weight(e, weight_key)
        if w < dist[i, j]:
            dist[i, j] = w
            next_hop[i, j] = j
            edge_choice[(i, j)] = e.id
    for k in range(n):
        through = dist[:, k, None] + dist[None, k, :]
        better = through < dist
        if better.any():
            dist = np.where(better, through, dist)
            next_hop = np.where(better, next_hop[:, k, None], next_hop)
    diag = np.diagonal(dist)
    if (diag < 0).any():
        offender = node_ids[int(np.argmin(diag))]
        raise NegativeCycleDetected(
            f"negative cycle through node {offender!r}", node=offender)
    return FloydWarshallResult(node_ids=node_ids, dist=dist, next_hop=next_hop,
                               edge_choice=edge_choice)
