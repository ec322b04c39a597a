"""Materialized point-in-time view of the timeline.

A snapshot is an immutable value: the engine hands copies out to analytics,
simulation and the API, which may read it from any thread. Layer sub-views
and neighbor lookups are deterministic (ordered by id).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from ..errors import UnknownNode
from .types import EdgeRecord, EntityNode, LayerKind


@dataclass
class GraphSnapshot:
    tick: int
    nodes: dict[str, EntityNode] = field(default_factory=dict)
    edges: dict[str, EdgeRecord] = field(default_factory=dict)
    # adjacency per layer: layer -> node id -> sorted edge ids
    _out: dict[LayerKind, dict[str, list[str]]] = field(default_factory=dict, repr=False)
    _in: dict[LayerKind, dict[str, list[str]]] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self._out:
            self._build_index()

    def _build_index(self) -> None:
        self._out = {layer: {} for layer in LayerKind}
        self._in = {layer: {} for layer in LayerKind}
        for eid in sorted(self.edges):
            edge = self.edges[eid]
            self._out[edge.layer].setdefault(edge.src, []).append(eid)
            self._in[edge.layer].setdefault(edge.dst, []).append(eid)

    def layer_edges(self, layer: LayerKind | None = None) -> list[EdgeRecord]:
        """Edges of one layer (or all), ordered by edge id."""
        if layer is None:
            return [self.edges[eid] for eid in sorted(self.edges)]
        return [self.edges[eid] for eid in sorted(self.edges)
                if self.edges[eid].layer == layer]

    def neighbors(self, node_id: str, layer: LayerKind | None = None,
                  direction: str = "out") -> list[tuple[EdgeRecord, str]]:
        """(edge, neighbor id) pairs for a node, ordered by edge id.

        direction is "out", "in" or "both"; layer=None spans all layers.
        """
        if node_id not in self.nodes:
            raise UnknownNode(f"node {node_id!r} not in snapshot at tick {self.tick}")
        layers = [layer] if layer is not None else list(LayerKind)
        eids: list[str] = []
        if direction in ("out", "both"):
            for ly in layers:
                eids.extend(self._out[ly].get(node_id, []))
        if direction in ("in", "both"):
            for ly in layers:
                eids.extend(self._in[ly].get(node_id, []))
        out = []
        for eid in sorted(eids):
            edge = self.edges[eid]
            other = edge.dst if edge.src == node_id else edge.src
            out.append((edge, other))
        return out

    def node_ids(self) -> list[str]:
        return sorted(self.nodes)

    def material_nodes(self) -> list[str]:
        """Nodes touching the material layer, plus isolated ones (i.e. all);
        kept as an explicit accessor so callers state intent."""
        return sorted(self.nodes)

    def customers(self) -> list[str]:
        from .types import EntityKind
        return sorted(nid for nid, n in self.nodes.items()
                      if n.kind == EntityKind.CUSTOMER)

    def to_dict(self) -> dict:
        return {
            "tick": self.tick,
            "nodes": [self.nodes[nid].to_dict() for nid in sorted(self.nodes)],
            "edges": [self.edges[eid].to_dict() for eid in sorted(self.edges)],
        }

    def content_hash(self) -> str:
        """Stable digest of the snapshot's full content (canonical JSON)."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()
