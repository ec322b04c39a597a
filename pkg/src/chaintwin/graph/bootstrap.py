"""Graph bootstrap from delimited node/edge tables.

Two UTF-8 files with a header row, one record per line. Missing optional
fields are left empty. Records are committed to the timeline at tick 0 (or
an explicit tick), nodes before edges.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .timeline import GraphTimeline
from .types import EdgeRecord, EntityKind, EntityNode, LayerKind, StateVector, WeightVector

NODE_COLUMNS = ["id", "kind", "label", "inventory", "backlog", "capacity",
                "lead_time", "demand_rate", "reliability", "carbon_intensity",
                "location_x", "location_y"]
EDGE_COLUMNS = ["id", "src", "dst", "layer", "cost_per_unit", "transit_time",
                "capacity", "reliability", "carbon_per_unit", "valid_from",
                "valid_until"]

_NODE_ATTR_COLS = ("capacity", "lead_time", "demand_rate", "reliability",
                   "carbon_intensity")


def _opt_float(row: dict[str, str], key: str) -> float | None:
    raw = (row.get(key) or "").strip()
    return float(raw) if raw else None


def node_from_row(row: dict[str, str]) -> EntityNode:
    attrs = {}
    for col in _NODE_ATTR_COLS:
        v = _opt_float(row, col)
        if v is not None:
            attrs[col] = v
    x, y = _opt_float(row, "location_x"), _opt_float(row, "location_y")
    state = StateVector(
        inventory=int(_opt_float(row, "inventory") or 0),
        backlog=int(_opt_float(row, "backlog") or 0),
    )
    return EntityNode(
        id=row["id"].strip(),
        kind=EntityKind(row["kind"].strip()),
        label=(row.get("label") or "").strip(),
        state=state,
        attrs=attrs,
        location=(x, y) if x is not None and y is not None else None,
    )


def edge_from_row(row: dict[str, str]) -> EdgeRecord:
    weights = WeightVector(
        cost_per_unit=_opt_float(row, "cost_per_unit") or 0.0,
        transit_time=_opt_float(row, "transit_time") or 1.0,
        capacity=int(_opt_float(row, "capacity") or 0),
        reliability=_opt_float(row, "reliability") if _opt_float(row, "reliability") is not None else 1.0,
        carbon_per_unit=_opt_float(row, "carbon_per_unit") or 0.0,
    )
    until = _opt_float(row, "valid_until")
    return EdgeRecord(
        id=row["id"].strip(),
        src=row["src"].strip(),
        dst=row["dst"].strip(),
        layer=LayerKind(row["layer"].strip()),
        weights=weights,
        valid_from=int(_opt_float(row, "valid_from") or 0),
        valid_until=int(until) if until is not None else None,
    )


def load_graph_tables(timeline: GraphTimeline, nodes_path: str | Path,
                      edges_path: str | Path, tick: int = 0) -> tuple[int, int]:
    """Load node and edge tables into the timeline. Returns (nodes, edges) counts."""
    n_nodes = n_edges = 0
    with open(nodes_path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            timeline.add_node(tick, node_from_row(row))
            n_nodes += 1
    with open(edges_path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            timeline.add_edge(tick, edge_from_row(row))
            n_edges += 1
    return n_nodes, n_edges


def write_graph_tables(snapshot, nodes_path: str | Path, edges_path: str | Path) -> None:
    """Export a snapshot back to bootstrap tables (round-trip support)."""
    with open(nodes_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(NODE_COLUMNS)
        for nid in sorted(snapshot.nodes):
            n = snapshot.nodes[nid]
            loc = n.location or ("", "")
            w.writerow([
                n.id, n.kind.value, n.label, n.state.inventory, n.state.backlog,
                *(n.attrs.get(c, "") for c in _NODE_ATTR_COLS),
                loc[0], loc[1],
            ])
    with open(edges_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(EDGE_COLUMNS)
        for eid in sorted(snapshot.edges):
            e = snapshot.edges[eid]
            w.writerow([
                e.id, e.src, e.dst, e.layer.value,
                e.weights.cost_per_unit, e.weights.transit_time,
                e.weights.capacity, e.weights.reliability,
                e.weights.carbon_per_unit, e.valid_from,
                "" if e.valid_until is None else e.valid_until,
            ])
