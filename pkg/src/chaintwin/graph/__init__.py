from .types import (
    EntityKind,
    LayerKind,
    StateVector,
    EntityNode,
    WeightVector,
    EdgeRecord,
    GraphDelta,
)
from .snapshot import GraphSnapshot
from .timeline import GraphTimeline
from .bootstrap import load_graph_tables, write_graph_tables

__all__ = [
    "EntityKind", "LayerKind", "StateVector", "EntityNode", "WeightVector",
    "EdgeRecord", "GraphDelta", "GraphSnapshot", "GraphTimeline",
    "load_graph_tables", "write_graph_tables",
]
