"""Community detection by agglomerative modularity maximization.

Works on the undirected unit-weight projection of the chosen layer(s):
start from singletons, repeatedly merge the community pair with the largest
positive modularity gain, stop when no merge improves. Merge gain for
communities A, B with L_AB connecting edges, degree sums d_A, d_B and m
total edges:

    dQ = L_AB / m  -  d_A * d_B / (2 m^2)

Ties break on the lexicographically smallest (min-member, min-member) pair,
so results are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import EmptyGraph
from ..graph.snapshot import GraphSnapshot
from ..graph.types import LayerKind


@dataclass
class CommunityAssignment:
    partition: dict[str, int]   # node -> community index
    modularity: float
    communities: list[list[str]]  # sorted members, ordered by min member

    def to_dict(self) -> dict:
        return {"partition": dict(sorted(self.partition.items())),
                "modularity": self.modularity,
                "communities": self.communities}


def undirected_projection(snapshot: GraphSnapshot,
                          layer: LayerKind | None = None
                          ) -> tuple[list[str], set[tuple[str, str]]]:
    """Simple undirected edge set (unit weights, parallels collapsed)."""
    nodes = snapshot.node_ids()
    pairs: set[tuple[str, str]] = set()
    for e in snapshot.layer_edges(layer):
        a, b = sorted((e.src, e.dst))
        pairs.add((a, b))
    return nodes, pairs


def modularity_of(partition: dict[str, int], nodes: list[str],
                  pairs: set[tuple[str, str]]) -> float:
    """Direct evaluation of Q for an arbitrary partition."""
    m = len(pairs)
    if m == 0:
        return 0.0
    degree: dict[str, int] = {n: 0 for n in nodes}
    for a, b in pairs:
        degree[a] += 1
        degree[b] += 1
    intra: dict[int, int] = {}
    deg_sum: dict[int, int] = {}
    for n in nodes:
        deg_sum[partition[n]] = deg_sum.get(partition[n], 0) + degree[n]
    for a, b in pairs:
        if partition[a] == partition[b]:
            intra[partition[a]] = intra.get(partition[a], 0) + 1
    q = 0.0
    for comm in deg_sum:
        q += intra.get(comm, 0) / m - (deg_sum[comm] / (2 * m)) ** 2
    return q


def community_detect(snapshot: GraphSnapshot,
                     layer: LayerKind | None = None) -> CommunityAssignment:
    if not snapshot.nodes:
        raise EmptyGraph("community detection requires a non-empty snapshot")
    nodes, pairs = undirected_projection(snapshot, layer)
    m = len(pairs)
    if m == 0:
        partition = {n: i for i, n in enumerate(nodes)}
        return CommunityAssignment(partition=partition, modularity=0.0,
                                   communities=[[n] for n in nodes])

    # community label = min member id; communities as sorted member lists
    members: dict[str, list[str]] = {n: [n] for n in nodes}
    degree: dict[str, int] = {n: 0 for n in nodes}
    links: dict[str, dict[str, int]] = {n: {} for n in nodes}  # label -> label -> L_AB
    deg_sum: dict[str, int] = {}
    for a, b in pairs:
        degree[a] += 1
        degree[b] += 1
        links[a][b] = links[a].get(b, 0) + 1
        links[b][a] = links[b].get(a, 0) + 1
    for n in nodes:
        deg_sum[n] = degree[n]

    while True:
        best = None  # (dq, label_a, label_b)
        for a in sorted(links):
            for b in sorted(links[a]):
                if b <= a:
                    continue
                dq = links[a][b] / m - deg_sum[a] * deg_sum[b] / (2.0 * m * m)
                if dq > 1e-12 and (best is None or dq > best[0] + 1e-12):
                    best = (dq, a, b)
        if best is None:
            break
        _, a, b = best
        # merge b into a (a = min label stays valid: a < b)
        members[a] = sorted(members[a] + members.pop(b))
        deg_sum[a] += deg_sum.pop(b)
        b_links = links.pop(b)
        for other, cnt in b_links.items():
            if other == a:
                continue
            links[other].pop(b, None)
            links[a][other] = links[a].get(other, 0) + cnt
            links[other][a] = links[a][other]
        links[a].pop(b, None)

    ordered = sorted(members.values(), key=lambda ms: ms[0])
    partition = {n: i for i, ms in enumerate(ordered) for n in ms}
    q = modularity_of(partition, nodes, pairs)
    return CommunityAssignment(partition=partition, modularity=q,
                               communities=ordered)
