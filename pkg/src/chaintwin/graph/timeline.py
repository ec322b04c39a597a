"""Append-only timeline of graph deltas with point-in-time snapshots.

The timeline is the single source of truth for the twin's structure. All
mutation goes through the append log (one writer, serialized by a lock);
snapshots are materialized by replaying deltas ordered by (tick, seq) and
are immutable values. When bound to a log file, every delta is written and
flushed before it is applied (log-then-apply), so a crash between the two
replays to the identical state.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any, IO

from ..errors import (
    DuplicateId,
    InvalidAttribute,
    InvalidWeight,
    UnknownEndpoint,
    UnknownNode,
)
from .snapshot import GraphSnapshot
from .types import (
    EdgeRecord,
    EntityNode,
    GraphDelta,
    LayerKind,
    WEIGHT_FIELDS,
    WeightVector,
    check_node_attr,
)


class GraphTimeline:
    def __init__(self, log_path: str | Path | None = None):
        self._deltas: list[GraphDelta] = []
        self._seq = 0
        self._lock = threading.RLock()
        self._log_path = Path(log_path) if log_path else None
        self._log_file: IO[str] | None = None

        # Incrementally maintained head (state as of the latest tick), with
        # per-field last-writer keys so late deltas cannot clobber newer ones.
        self._head_nodes: dict[str, EntityNode] = {}
        self._head_edges: dict[str, EdgeRecord] = {}
        self._node_created: dict[str, int] = {}
        self._node_retired: dict[str, int] = {}
        self._edge_created: dict[str, int] = {}
        self._edge_retired: dict[str, int] = {}
        self._writers: dict[tuple[str, str, str], tuple[int, int]] = {}
        self._ids_ever: set[str] = set()
        self._applied_provenance: set[tuple[str, str]] = set()
        self._max_tick = 0
        self._snap_cache: dict[tuple[int, int], GraphSnapshot] = {}

    # ------------------------------------------------------------------
    # loading / persistence

    @classmethod
    def load(cls, log_path: str | Path) -> "GraphTimeline":
        """Rebuild a timeline by replaying a persisted delta log.

        A torn trailing line (crash mid-write) is ignored.
        """
        tl = cls()
        path = Path(log_path)
        if path.exists():
            raw = path.read_bytes().decode("utf-8", errors="replace")
            for line in raw.split("\n"):
                line = line.strip()
                if not line:
                    continue
                try:
                    delta = GraphDelta.from_dict(json.loads(line))
                except (json.JSONDecodeError, KeyError, ValueError):
                    continue  # torn or foreign trailing data
                tl._ingest_replayed(delta)
        tl._log_path = path
        return tl

    def _ingest_replayed(self, delta: GraphDelta) -> None:
        self._deltas.append(delta)
        self._seq = max(self._seq, delta.seq + 1)
        self._apply_to_head(delta)
        if delta.provenance is not None:
            self._applied_provenance.add(delta.provenance)
        self._max_tick = max(self._max_tick, delta.tick)

    def _write_log(self, delta: GraphDelta) -> None:
        if self._log_path is None:
            return
        if self._log_file is None:
            self._log_path.parent.mkdir(parents=True, exist_ok=True)
            self._log_file = open(self._log_path, "a", encoding="utf-8")
        self._log_file.write(json.dumps(delta.to_dict(), sort_keys=True) + "\n")
        self._log_file.flush()

    def close(self) -> None:
        if self._log_file is not None:
            self._log_file.close()
            self._log_file = None

    # ------------------------------------------------------------------
    # append operations

    def _append(self, tick: int, op: str, payload: dict[str, Any],
                provenance: tuple[str, str] | None = None) -> GraphDelta:
        delta = GraphDelta(tick=tick, seq=self._seq, op=op, payload=payload,
                           provenance=provenance)
        self._write_log(delta)  # log-then-apply
        self._deltas.append(delta)
        self._seq += 1
        self._apply_to_head(delta)
        if provenance is not None:
            self._applied_provenance.add(provenance)
        self._max_tick = max(self._max_tick, tick)
        self._snap_cache.clear()
        return delta

    def add_node(self, tick: int, node: EntityNode) -> str:
        with self._lock:
            if tick < 0:
                raise InvalidAttribute("tick must be >= 0")
            if node.id in self._ids_ever:
                raise DuplicateId(f"id {node.id!r} already used in this timeline")
            node.validate()
            self._append(tick, "add_node", node.to_dict())
            return node.id

    def add_edge(self, tick: int, edge: EdgeRecord) -> str:
        with self._lock:
            if edge.id in self._ids_ever:
                raise DuplicateId(f"id {edge.id!r} already used in this timeline")
            edge.validate()
            for endpoint in (edge.src, edge.dst):
                if not self._node_live_at(endpoint, tick):
                    raise UnknownEndpoint(
                        f"edge {edge.id!r}: endpoint {endpoint!r} not live at tick {tick}")
            self._append(tick, "add_edge", edge.to_dict())
            return edge.id

    def set_node_attr(self, tick: int, node_id: str, field: str, value: Any,
                      provenance: tuple[str, str] | None = None) -> GraphDelta:
        """Set `attrs.<name>`, `state.<name>` or `label` on a live node."""
        with self._lock:
            if not self._node_live_at(node_id, tick):
                raise UnknownNode(f"node {node_id!r} not live at tick {tick}")
            self._check_node_field(node_id, field, value)
            return self._append(tick, "set_node_attr",
                                {"id": node_id, "field": field, "value": value},
                                provenance)

    def set_edge_weight(self, tick: int, edge_id: str, field: str, value: Any,
                        provenance: tuple[str, str] | None = None) -> GraphDelta:
        with self._lock:
            edge = self._head_edges.get(edge_id)
            if edge is None:
                raise UnknownNode(f"edge {edge_id!r} unknown")
            if field not in WEIGHT_FIELDS:
                raise InvalidWeight(f"unknown weight field {field!r}")
            probe = edge.weights.copy()
            setattr(probe, field, type(getattr(probe, field))(value))
            probe.validate(edge.layer)
            return self._append(tick, "set_edge_weight",
                                {"id": edge_id, "field": field, "value": value},
                                provenance)

    def retire_node(self, tick: int, node_id: str) -> GraphDelta:
        with self._lock:
            if not self._node_live_at(node_id, tick):
                raise UnknownNode(f"node {node_id!r} not live at tick {tick}")
            return self._append(tick, "retire_node", {"id": node_id})

    def retire_edge(self, tick: int, edge_id: str) -> GraphDelta:
        with self._lock:
            if edge_id not in self._head_edges or edge_id in self._edge_retired:
                raise UnknownNode(f"edge {edge_id!r} unknown or already retired")
            return self._append(tick, "retire_edge", {"id": edge_id})

    # ------------------------------------------------------------------
    # head maintenance

    def _apply_to_head(self, delta: GraphDelta) -> None:
        op, p = delta.op, delta.payload
        if op == "add_node":
            node = EntityNode.from_dict(p)
            self._head_nodes[node.id] = node
            self._node_created[node.id] = delta.tick
            self._ids_ever.add(node.id)
        elif op == "add_edge":
            edge = EdgeRecord.from_dict(p)
            self._head_edges[edge.id] = edge
            self._edge_created[edge.id] = delta.tick
            self._ids_ever.add(edge.id)
        elif op == "set_node_attr":
            key = ("node", p["id"], p["field"])
            if self._writers.get(key, (-1, -1)) <= delta.order_key():
                node = self._head_nodes.get(p["id"])
                if node is not None:
                    self._set_node_field(node, p["field"], p["value"])
                    self._writers[key] = delta.order_key()
        elif op == "set_edge_weight":
            key = ("edge", p["id"], p["field"])
            if self._writers.get(key, (-1, -1)) <= delta.order_key():
                edge = self._head_edges.get(p["id"])
                if edge is not None:
                    field = p["field"]
                    cur = getattr(edge.weights, field)
                    setattr(edge.weights, field, type(cur)(p["value"]))
                    self._writers[key] = delta.order_key()
        elif op == "retire_node":
            prev = self._node_retired.get(p["id"])
            if prev is None or delta.tick < prev:
                self._node_retired[p["id"]] = delta.tick
        elif op == "retire_edge":
            prev = self._edge_retired.get(p["id"])
            if prev is None or delta.tick < prev:
                self._edge_retired[p["id"]] = delta.tick

    @staticmethod
    def _set_node_field(node: EntityNode, field: str, value: Any) -> None:
        if field.startswith("attrs."):
            node.attrs[field[6:]] = value
        elif field.startswith("state."):
            name = field[6:]
            if name in ("inventory", "backlog", "throughput_used"):
                setattr(node.state, name, int(value))
            else:
                node.state.custom[name] = float(value)
        elif field == "label":
            node.label = str(value)

    def _check_node_field(self, node_id: str, field: str, value: Any) -> None:
        if field.startswith("attrs."):
            check_node_attr(field[6:], value)
        elif field.startswith("state."):
            name = field[6:]
            if name in ("inventory", "backlog") and int(value) < 0:
                raise InvalidAttribute(
                    f"state.{name}={value} violates bound >= 0")
        elif field != "label":
            raise InvalidAttribute(f"unknown node field {field!r}")

    def _node_live_at(self, node_id: str, tick: int) -> bool:
        created = self._node_created.get(node_id)
        if created is None or created > tick:
            return False
        retired = self._node_retired.get(node_id)
        return retired is None or tick < retired

    # ------------------------------------------------------------------
    # reads

    @property
    def max_tick(self) -> int:
        return self._max_tick

    @property
    def deltas(self) -> list[GraphDelta]:
        return list(self._deltas)

    def has_provenance(self, provenance: tuple[str, str]) -> bool:
        return provenance in self._applied_provenance

    def current_node(self, node_id: str) -> EntityNode | None:
        """Head value (latest state) of a node; None if absent/retired."""
        with self._lock:
            if node_id in self._node_retired:
                return None
            node = self._head_nodes.get(node_id)
            return node.copy() if node is not None else None

    def current_edge(self, edge_id: str) -> EdgeRecord | None:
        with self._lock:
            if edge_id in self._edge_retired:
                return None
            edge = self._head_edges.get(edge_id)
            return edge.copy() if edge is not None else None

    def knows_subject(self, subject: str) -> bool:
        return subject in self._head_nodes or subject in self._head_edges

    def snapshot_at(self, tick: int) -> GraphSnapshot:
        """Materialize the graph as of `tick` by full replay.

        Pure: repeated calls yield structurally identical snapshots.
        """
        with self._lock:
            key = (tick, len(self._deltas))
            cached = self._snap_cache.get(key)
            if cached is not None:
                return cached
            snap = self._replay(tick)
            if len(self._snap_cache) > 16:
                self._snap_cache.clear()
            self._snap_cache[key] = snap
            return snap

    def _replay(self, tick: int) -> GraphSnapshot:
        nodes: dict[str, EntityNode] = {}
        edges: dict[str, EdgeRecord] = {}
        retired_nodes: set[str] = set()
        retired_edges: set[str] = set()
        for delta in sorted(self._deltas, key=GraphDelta.order_key):
            if delta.tick > tick:
                continue
            op, p = delta.op, delta.payload
            if op == "add_node":
                nodes[p["id"]] = EntityNode.from_dict(p)
            elif op == "add_edge":
                edges[p["id"]] = EdgeRecord.from_dict(p)
            elif op == "set_node_attr" and p["id"] in nodes:
                self._set_node_field(nodes[p["id"]], p["field"], p["value"])
            elif op == "set_edge_weight" and p["id"] in edges:
                edge = edges[p["id"]]
                cur = getattr(edge.weights, p["field"])
                setattr(edge.weights, p["field"], type(cur)(p["value"]))
            elif op == "retire_node":
                retired_nodes.add(p["id"])
            elif op == "retire_edge":
                retired_edges.add(p["id"])
        nodes = {nid: n for nid, n in nodes.items() if nid not in retired_nodes}
        live_edges = {}
        for eid, edge in edges.items():
            if eid in retired_edges or not edge.live_at(tick):
                continue
            if edge.src not in nodes or edge.dst not in nodes:
                continue
            live_edges[eid] = edge
        return GraphSnapshot(tick=tick, nodes=nodes, edges=live_edges)

    def head_snapshot(self) -> GraphSnapshot:
        """Snapshot at the latest committed tick."""
        return self.snapshot_at(self._max_tick)
