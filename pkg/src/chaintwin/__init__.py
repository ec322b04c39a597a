"""chaintwin: a graph-based digital twin engine for supply chains.

The engine keeps a time-evolving multi-layer graph of supply-chain entities,
ingests telemetry into it, simulates the network forward under explicit
dynamics, plans flows against a cost functional, analyzes structure and
resilience, reports KPIs, and recalibrates itself from observed outcomes.
"""

__version__ = "0.1.0"

from .graph import (
    EdgeRecord,
    EntityKind,
    EntityNode,
    GraphDelta,
    GraphSnapshot,
    GraphTimeline,
    LayerKind,
    StateVector,
    WeightVector,
)

__all__ = [
    "EdgeRecord", "EntityKind", "EntityNode", "GraphDelta", "GraphSnapshot",
    "GraphTimeline", "LayerKind", "StateVector", "WeightVector", "__version__",
]
