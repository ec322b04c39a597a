"""Exception types shared across the engine.

Every failure path raises one of these; the service layer maps them onto
stable machine-readable API error codes.
"""

from __future__ import annotations


class ChainTwinError(Exception):
    """Base class for all engine errors."""

    code = "internal"


class DuplicateId(ChainTwinError):
    code = "duplicate_id"


class InvalidAttribute(ChainTwinError):
    """An attribute violates its declared bound; message names the bound."""

    code = "invalid_attribute"


class InvalidWeight(ChainTwinError):
    code = "invalid_weight"


class UnknownEndpoint(ChainTwinError):
    code = "unknown_endpoint"


class UnknownNode(ChainTwinError):
    code = "unknown_node"


class UnknownSubject(ChainTwinError):
    code = "unknown_subject"


class UnknownMeasure(ChainTwinError):
    code = "unknown_measure"


class StaleTick(ChainTwinError):
    code = "stale_tick"


class QueueFull(ChainTwinError):
    code = "queue_full"


class CapacityExceeded(ChainTwinError):
    """A flow exceeds the post-disturbance capacity; names edge and tick."""

    code = "capacity_exceeded"


class NegativeInventoryUnclamped(ChainTwinError):
    """Internal consistency failure in the state update; must never occur."""

    code = "negative_inventory"


class IncompleteTrace(ChainTwinError):
    code = "incomplete_trace"


class NegativeWeightPresent(ChainTwinError):
    """Dijkstra precondition violated; caller should use Bellman-Ford."""

    code = "negative_weight"


class NegativeCycleDetected(ChainTwinError):
    def __init__(self, message: str, node: str | None = None):
        super().__init__(message)
        self.node = node

    code = "negative_cycle"


class EmptyGraph(ChainTwinError):
    code = "empty_graph"


class EmptyMaterialLayer(ChainTwinError):
    code = "empty_material_layer"


class UnboundedNegativeCycle(ChainTwinError):
    """The planning network admits infinite gain; carries the offending cycle."""

    def __init__(self, message: str, cycle: list[int] | None = None):
        super().__init__(message)
        self.cycle = cycle or []

    code = "unbounded_negative_cycle"


class InfeasibleUnderDisturbance(ChainTwinError):
    code = "infeasible_plan"


class DuplicateOpenPrediction(ChainTwinError):
    code = "duplicate_open_prediction"


class InsufficientSamples(ChainTwinError):
    code = "insufficient_samples"


class WindowOutOfRange(ChainTwinError):
    code = "window_out_of_range"
