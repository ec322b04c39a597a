"""Node centrality: degree, betweenness (exact Brandes), closeness.

Betweenness counts ordered pairs over the directed graph, unnormalized,
with shortest-path ties split fractionally (exact dependency accumulation).
Parallel edges collapse to simple adjacency first; path multiplicity comes
from distinct routes, not duplicated links. Closeness uses the reachable-set
normalization ((r-1)/(n-1) * (r-1)/sum d), which equals (n-1)/sum d when
everything is reachable and stays within [0, 1] on disconnected graphs;
isolated nodes score 0.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from ..errors import EmptyGraph, UnknownMeasure
from ..graph.snapshot import GraphSnapshot
from ..graph.types import LayerKind

MEASURES = ("degree", "betweenness", "closeness")


@dataclass
class CentralityReport:
    measure: str
    scores: dict[str, float]
    ranking: list[str]  # descending score, ties by node id

    def to_dict(self) -> dict:
        return {"measure": self.measure,
                "scores": dict(sorted(self.scores.items())),
                "ranking": self.ranking}


def _simple_adjacency(snapshot: GraphSnapshot, layer: LayerKind | None
                      ) -> tuple[dict[str, list[str]], dict[str, list[str]]]:
    out_adj: dict[str, set[str]] = {nid: set() for nid in snapshot.nodes}
    in_adj: dict[str, set[str]] = {nid: set() for nid in snapshot.nodes}
    for e in snapshot.layer_edges(layer):
        out_adj[e.src].add(e.dst)
        in_adj[e.dst].add(e.src)
    return ({n: sorted(vs) for n, vs in out_adj.items()},
            {n: sorted(vs) for n, vs in in_adj.items()})


def _degree(snapshot: GraphSnapshot, layer: LayerKind | None) -> dict[str, float]:
    scores = {nid: 0.0 for nid in snapshot.nodes}
    for e in snapshot.layer_edges(layer):
        scores[e.src] += 1.0
        scores[e.dst] += 1.0
    return scores


def _betweenness(snapshot: GraphSnapshot, layer: LayerKind | None
                 ) -> dict[str, float]:
    out_adj, _ = _simple_adjacency(snapshot, layer)
    nodes = snapshot.node_ids()
    bc = {v: 0.0 for v in nodes}
    for s in nodes:
        # BFS shortest-path DAG from s
        sigma = {v: 0.0 for v in nodes}
        sigma[s] = 1.0
        dist = {v: -1 for v in nodes}
        dist[s] = 0
        preds: dict[str, list[str]] = {v: [] for v in nodes}
        order: list[str] = []
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in out_adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        # dependency accumulation in reverse BFS order
        delta = {v: 0.0 for v in nodes}
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                bc[w] += delta[w]
    return bc


def _closeness(snapshot: GraphSnapshot, layer: LayerKind | None
               ) -> dict[str, float]:
    out_adj, _ = _simple_adjacency(snapshot, layer)
    nodes = snapshot.node_ids()
    n = len(nodes)
    scores: dict[str, float] = {}
    for s in nodes:
        dist = {s: 0}
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in out_adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        reach = len(dist) - 1  # excluding s
        total = sum(dist.values())
        if reach == 0 or total == 0 or n <= 1:
            scores[s] = 0.0
        else:
            scores[s] = (reach / (n - 1)) * (reach / total)
    return scores


def centrality(snapshot: GraphSnapshot, measure: str,
               layer: LayerKind | None = None) -> CentralityReport:
    if not snapshot.nodes:
        raise EmptyGraph("centrality requires a non-empty snapshot")
    if measure == "degree":
        scores = _degree(snapshot, layer)
    elif measure == "betweenness":
        scores = _betweenness(snapshot, layer)
    elif measure == "closeness":
        scores = _closeness(snapshot, layer)
    else:
        raise UnknownMeasure(
            f"unknown centrality measure {measure!r}; expected one of {MEASURES}")
    ranking = sorted(scores, key=lambda nid: (-scores[nid], nid))
    return CentralityReport(measure=measure, scores=scores, ranking=ranking)
