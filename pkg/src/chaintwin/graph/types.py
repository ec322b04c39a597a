"""Domain types for the multi-layer supply-chain graph.

Nodes are supply-chain entities carrying a per-tick state vector; edges are
layered relationships (material / information / financial) carrying a weight
vector. Attribute bounds are enforced at construction and on every update,
so a committed timeline never holds an out-of-range value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from ..errors import InvalidAttribute, InvalidWeight


class EntityKind(str, Enum):
    SUPPLIER = "supplier"
    MANUFACTURER = "manufacturer"
    WAREHOUSE = "warehouse"
    DISTRIBUTOR = "distributor"
    CUSTOMER = "customer"


class LayerKind(str, Enum):
    MATERIAL = "material"
    INFORMATION = "information"
    FINANCIAL = "financial"


# Node attributes with bounds. reliability lives in [0, 1]; the rest are
# non-negative rates/levels. Unknown attribute names pass through untouched.
NODE_ATTR_BOUNDS: dict[str, tuple[float, float]] = {
    "capacity": (0.0, math.inf),
    "lead_time": (0.0, math.inf),
    "demand_rate": (0.0, math.inf),
    "reliability": (0.0, 1.0),
    "carbon_intensity": (0.0, math.inf),
}

# Per-kind required attributes (schema check mirrors the per-subtype
# attribute taxonomy: customers declare demand, manufacturers capacity).
REQUIRED_NODE_ATTRS: dict[EntityKind, tuple[str, ...]] = {
    EntityKind.CUSTOMER: ("demand_rate",),
    EntityKind.MANUFACTURER: ("capacity",),
}


def check_node_attr(name: str, value: float) -> None:
    """Raise InvalidAttribute (naming the violated bound) if out of range."""
    if isinstance(value, (int, float)):
        if not math.isfinite(float(value)):
            raise InvalidAttribute(f"attribute {name!r} must be finite, got {value!r}")
    bounds = NODE_ATTR_BOUNDS.get(name)
    if bounds is None:
        return
    lo, hi = bounds
    v = float(value)
    if not (lo <= v <= hi):
        bound = f"[{lo}, {hi}]" if math.isfinite(hi) else f">= {lo}"
        raise InvalidAttribute(f"attribute {name!r}={value!r} violates bound {bound}")


@dataclass
class StateVector:
    """Per-entity operational state advanced by the simulation kernel."""

    inventory: int = 0
    backlog: int = 0
    throughput_used: int = 0
    custom: dict[str, float] = field(default_factory=dict)

    def validate(self) -> None:
        if self.inventory < 0:
            raise InvalidAttribute(f"state.inventory={self.inventory} violates bound >= 0")
        if self.backlog < 0:
            raise InvalidAttribute(f"state.backlog={self.backlog} violates bound >= 0")
        for k, v in self.custom.items():
            if not math.isfinite(float(v)):
                raise InvalidAttribute(f"state.custom[{k!r}] must be finite")

    def copy(self) -> "StateVector":
        return StateVector(self.inventory, self.backlog, self.throughput_used,
                           dict(self.custom))

    def to_dict(self) -> dict[str, Any]:
        return {
            "inventory": self.inventory,
            "backlog": self.backlog,
            "throughput_used": self.throughput_used,
            "custom": dict(sorted(self.custom.items())),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "StateVector":
        return cls(
            inventory=int(d.get("inventory", 0)),
            backlog=int(d.get("backlog", 0)),
            throughput_used=int(d.get("throughput_used", 0)),
            custom=dict(d.get("custom", {})),
        )


@dataclass
class EntityNode:
    """A supply-chain entity: supplier, manufacturer, warehouse, distributor
    or customer. `kind` is immutable after creation."""

    id: str
    kind: EntityKind
    label: str = ""
    state: StateVector = field(default_factory=StateVector)
    attrs: dict[str, float] = field(default_factory=dict)
    location: tuple[float, float] | None = None

    def validate(self) -> None:
        if not self.id:
            raise InvalidAttribute("node id must be non-empty")
        self.state.validate()
        for name, value in self.attrs.items():
            check_node_attr(name, value)
        for name in REQUIRED_NODE_ATTRS.get(self.kind, ()):
            if name not in self.attrs:
                raise InvalidAttribute(
                    f"{self.kind.value} node {self.id!r} requires attribute {name!r}")

    def copy(self) -> "EntityNode":
        return EntityNode(self.id, self.kind, self.label, self.state.copy(),
                          dict(self.attrs), self.location)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "label": self.label,
            "state": self.state.to_dict(),
            "attrs": dict(sorted(self.attrs.items())),
            "location": list(self.location) if self.location else None,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "EntityNode":
        loc = d.get("location")
        return cls(
            id=d["id"],
            kind=EntityKind(d["kind"]),
            label=d.get("label", ""),
            state=StateVector.from_dict(d.get("state", {})),
            attrs=dict(d.get("attrs", {})),
            location=(float(loc[0]), float(loc[1])) if loc else None,
        )


@dataclass
class WeightVector:
    """Edge weights: cost, transit time, capacity, reliability, carbon.

    transit_time is a float (the feedback loop smooths it fractionally);
    the simulation rounds it when scheduling arrivals.
    """

    cost_per_unit: float = 0.0
    transit_time: float = 1.0
    capacity: int = 0
    reliability: float = 1.0
    carbon_per_unit: float = 0.0

    def validate(self, layer: LayerKind) -> None:
        for name in ("cost_per_unit", "transit_time", "reliability", "carbon_per_unit"):
            v = getattr(self, name)
            if not math.isfinite(float(v)):
                raise InvalidWeight(f"weight {name!r} must be finite, got {v!r}")
        if self.capacity < 0:
            raise InvalidWeight(f"weight capacity={self.capacity} violates bound >= 0")
        if layer == LayerKind.MATERIAL and self.transit_time < 1:
            raise InvalidWeight(
                f"material edge transit_time={self.transit_time} violates bound >= 1 tick")
        if self.transit_time < 0:
            raise InvalidWeight(f"weight transit_time={self.transit_time} violates bound >= 0")
        if not (0.0 <= self.reliability <= 1.0):
            raise InvalidWeight(
                f"weight reliability={self.reliability} violates bound [0, 1]")
        if self.carbon_per_unit < 0:
            raise InvalidWeight(
                f"weight carbon_per_unit={self.carbon_per_unit} violates bound >= 0")
        if self.cost_per_unit < 0 and layer != LayerKind.FINANCIAL:
            raise InvalidWeight(
                "negative cost_per_unit is allowed only on financial-layer edges")

    def copy(self) -> "WeightVector":
        return WeightVector(self.cost_per_unit, self.transit_time, self.capacity,
                            self.reliability, self.carbon_per_unit)

    def to_dict(self) -> dict[str, Any]:
        return {
            "cost_per_unit": self.cost_per_unit,
            "transit_time": self.transit_time,
            "capacity": self.capacity,
            "reliability": self.reliability,
            "carbon_per_unit": self.carbon_per_unit,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "WeightVector":
        return cls(
            cost_per_unit=float(d.get("cost_per_unit", 0.0)),
            transit_time=float(d.get("transit_time", 1.0)),
            capacity=int(d.get("capacity", 0)),
            reliability=float(d.get("reliability", 1.0)),
            carbon_per_unit=float(d.get("carbon_per_unit", 0.0)),
        )


WEIGHT_FIELDS = ("cost_per_unit", "transit_time", "capacity", "reliability",
                 "carbon_per_unit")


@dataclass
class EdgeRecord:
    """A layered relationship between two entities.

    Identity is the edge id (parallel edges between the same pair are legal,
    e.g. road vs. rail). `validity` is the half-open tick interval
    [valid_from, valid_until); valid_until=None means unbounded.
    """

    id: str
    src: str
    dst: str
    layer: LayerKind
    weights: WeightVector = field(default_factory=WeightVector)
    valid_from: int = 0
    valid_until: int | None = None

    def validate(self) -> None:
        if not self.id:
            raise InvalidWeight("edge id must be non-empty")
        if self.src == self.dst:
            raise InvalidWeight(f"edge {self.id!r}: self-loops are not allowed")
        if self.valid_until is not None and self.valid_until <= self.valid_from:
            raise InvalidWeight(
                f"edge {self.id!r}: empty validity [{self.valid_from}, {self.valid_until})")
        self.weights.validate(self.layer)

    def live_at(self, tick: int) -> bool:
        if tick < self.valid_from:
            return False
        return self.valid_until is None or tick < self.valid_until

    def copy(self) -> "EdgeRecord":
        return EdgeRecord(self.id, self.src, self.dst, self.layer,
                          self.weights.copy(), self.valid_from, self.valid_until)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "src": self.src,
            "dst": self.dst,
            "layer": self.layer.value,
            "weights": self.weights.to_dict(),
            "valid_from": self.valid_from,
            "valid_until": self.valid_until,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "EdgeRecord":
        return cls(
            id=d["id"],
            src=d["src"],
            dst=d["dst"],
            layer=LayerKind(d["layer"]),
            weights=WeightVector.from_dict(d.get("weights", {})),
            valid_from=int(d.get("valid_from", 0)),
            valid_until=None if d.get("valid_until") is None else int(d["valid_until"]),
        )


DELTA_OPS = ("add_node", "add_edge", "set_node_attr", "set_edge_weight",
             "retire_edge", "retire_node")


@dataclass
class GraphDelta:
    """One append-only log entry; totally ordered by (tick, seq)."""

    tick: int
    seq: int
    op: str
    payload: dict[str, Any]
    provenance: tuple[str, str] | None = None

    def order_key(self) -> tuple[int, int]:
        return (self.tick, self.seq)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "tick": self.tick,
            "seq": self.seq,
            "op": self.op,
            "payload": self.payload,
        }
        if self.provenance is not None:
            d["provenance"] = list(self.provenance)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "GraphDelta":
        prov = d.get("provenance")
        return cls(
            tick=int(d["tick"]),
            seq=int(d["seq"]),
            op=d["op"],
            payload=d["payload"],
            provenance=(prov[0], prov[1]) if prov else None,
        )
