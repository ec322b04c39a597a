"""Min-cost flow by successive shortest paths with potentials.

Potentials keep reduced costs non-negative so each augmentation is one
Dijkstra; an initial Bellman-Ford pass seeds them when negative-cost arcs
are present (and certifies UnboundedNegativeCycle if a negative cycle with
residual capacity exists). Integer capacities, float costs. Deterministic:
arcs are relaxed in construction order and ties settle on the smaller node
index / smaller predecessor arc id.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from ..errors import UnboundedNegativeCycle
from .network import TimeExpandedNetwork

EPS = 1e-9


@dataclass
class ResidualGraph:
    n: int
    to: list[int] = field(default_factory=list)
    cap: list[int] = field(default_factory=list)
    cost: list[float] = field(default_factory=list)
    head: list[list[int]] = field(default_factory=list)

    @classmethod
    def build(cls, n: int) -> "ResidualGraph":
        g = cls(n=n)
        g.head = [[] for _ in range(n)]
        return g

    def add(self, u: int, v: int, capacity: int, cost: float) -> int:
        idx = len(self.to)
        self.to.append(v)
        self.cap.append(capacity)
        self.cost.append(cost)
        self.head[u].append(idx)
        self.to.append(u)
        self.cap.append(0)
        self.cost.append(-cost)
        self.head[v].append(idx + 1)
        return idx


@dataclass
class FlowSolution:
    arc_flow: list[int]     # per original arc index
    total_cost: float
    augmentations: int


def _initial_potentials(g: ResidualGraph, n: int) -> list[float]:
    """Bellman-Ford from an implicit super-source (all nodes at 0)."""
    pot = [0.0] * n
    pred_arc = [-1] * n
    for it in range(n):
        changed = False
        for u in range(n):
            for aidx in g.head[u]:
                if g.cap[aidx] <= 0:
                    continue
                v = g.to[aidx]
                cand = pot[u] + g.cost[aidx]
                if cand < pot[v] - EPS:
                    pot[v] = cand
                    pred_arc[v] = aidx
                    changed = True
                    if it == n - 1:
                        raise UnboundedNegativeCycle(
                            "negative-cost cycle with residual capacity",
                            cycle=_walk_cycle(g, pred_arc, v))
        if not changed:
            break
    return pot


def _walk_cycle(g: ResidualGraph, pred_arc: list[int], start: int) -> list[int]:
    node = start
    for _ in range(len(pred_arc)):
        node = g.to[pred_arc[node] ^ 1]  # tail of the predecessor arc
    cycle = []
    cur = node
    while True:
        aidx = pred_arc[cur]
        cycle.append(aidx // 2)
        cur = g.to[aidx ^ 1]
        if cur == node:
            break
    cycle.reverse()
    return cycle


def solve_min_cost_flow(network: TimeExpandedNetwork) -> FlowSolution:
    n = len(network.node_labels)
    g = ResidualGraph.build(n)
    for arc in network.arcs:
        g.add(arc.src, arc.dst, arc.capacity, arc.cost)

    excess = [0] * n
    for idx, amount in network.excess.items():
        excess[idx] += amount
    assert sum(excess) == 0, "network imbalances must sum to zero"

    has_negative = any(arc.cost < 0 for arc in network.arcs)
    pot = _initial_potentials(g, n) if has_negative else [0.0] * n

    sources = sorted(i for i in range(n) if excess[i] > 0)
    deficits = {i for i in range(n) if excess[i] < 0}
    augmentations = 0
    while sources:
        s = sources[0]
        dist, pred = _dijkstra(g, s, pot)
        # nearest reachable deficit, ties by node index
        target = None
        for v in sorted(deficits):
            if dist[v] == float("inf"):
                continue
            if target is None or (dist[v], v) < (dist[target], target):
                target = v
        if target is None:
            raise UnboundedNegativeCycle(
                "deficit unreachable from excess; network malformed")
        bottleneck = min(excess[s], -excess[target])
        v = target
        while v != s:
            aidx = pred[v]
            bottleneck = min(bottleneck, g.cap[aidx])
            v = g.to[aidx ^ 1]
        v = target
        while v != s:
            aidx = pred[v]
            g.cap[aidx] -= bottleneck
            g.cap[aidx ^ 1] += bottleneck
            v = g.to[aidx ^ 1]
        excess[s] -= bottleneck
        excess[target] += bottleneck
        if excess[s] == 0:
            sources.pop(0)
        if excess[target] == 0:
            deficits.discard(target)
        # cap at dist[target] so arcs out of unreached nodes keep
        # non-negative reduced costs for later augmentations
        cap_dist = dist[target]
        for i in range(n):
            pot[i] += min(dist[i], cap_dist)
        augmentations += 1

    arc_flow = [g.cap[2 * k + 1] for k in range(len(network.arcs))]
    total = sum(f * network.arcs[k].cost for k, f in enumerate(arc_flow))
    return FlowSolution(arc_flow=arc_flow, total_cost=total,
                        augmentations=augmentations)


def _dijkstra(g: ResidualGraph, src: int, pot: list[float]
              ) -> tuple[list[float], list[int]]:
    n = g.n
    dist = [float("inf")] * n
    pred = [-1] * n
    dist[src] = 0.0
    heap = [(0.0, src)]
    settled = [False] * n
    while heap:
        d, u = heapq.heappop(heap)
        if settled[u]:
            continue
        settled[u] = True
        for aidx in g.head[u]:
            if g.cap[aidx] <= 0:
                continue
            v = g.to[aidx]
            if settled[v]:
                continue
            reduced = g.cost[aidx] + pot[u] - pot[v]
            if reduced < -EPS:
                reduced = 0.0  # float guard; potentials keep this >= 0
            cand = d + reduced
            if cand < dist[v] - EPS or (abs(cand - dist[v]) <= EPS
                                        and (pred[v] < 0 or aidx < pred[v])):
                if cand < dist[v]:
                    dist[v] = cand
                pred[v] = aidx
                heapq.heappush(heap, (dist[v], v))
    return dist, pred
