"""Scenario scripts: disturbances, supply schedules, demand profiles.

A scenario is a deterministic, human-writable description of one what-if
world: which nodes receive supply each tick, what customers demand, and
which disturbances (noise, capacity scaling, outages) hit which elements
over which tick ranges. Scenario documents are YAML; see
docs/scenario-guide.md for the schema.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from ..errors import InvalidAttribute

DISTURBANCE_KINDS = ("node_noise", "edge_noise", "capacity_scale",
                     "node_outage", "edge_outage")


@dataclass
class ControlAction:
    """u_i(t): an ordering / production / hold decision at a node."""

    node_id: str
    tick: int
    kind: str = "hold"  # order | produce | hold
    quantity: int = 0

    def validate(self) -> None:
        if self.kind not in ("order", "produce", "hold"):
            raise InvalidAttribute(f"unknown control kind {self.kind!r}")
        if self.quantity < 0:
            raise InvalidAttribute("control quantity must be >= 0")

    def to_dict(self) -> dict[str, Any]:
        return {"node_id": self.node_id, "tick": self.tick,
                "kind": self.kind, "quantity": self.quantity}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ControlAction":
        return cls(d["node_id"], int(d["tick"]), d.get("kind", "hold"),
                   int(d.get("quantity", 0)))


@dataclass
class FlowAssignment:
    """f_ij(t): units shipped over a material edge at a tick."""

    edge_id: str
    tick: int
    quantity: int = 0

    def validate(self) -> None:
        if self.quantity < 0:
            raise InvalidAttribute("flow quantity must be >= 0")

    def to_dict(self) -> dict[str, Any]:
        return {"edge_id": self.edge_id, "tick": self.tick,
                "quantity": self.quantity}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "FlowAssignment":
        return cls(d["edge_id"], int(d["tick"]), int(d.get("quantity", 0)))


@dataclass
class Disturbance:
    """An exogenous influence over [start, end) ticks.

    kinds: node_noise (additive integer noise on inventory, uniform in
    [-magnitude, +magnitude]), edge_noise (multiplicative drift of one
    weight field, factor 1+eta with eta uniform in [-magnitude, +magnitude]),
    capacity_scale (multiply capacity by magnitude for the range),
    node_outage / edge_outage (element down for the range).
    """

    target: str
    kind: str
    start: int = 0
    end: int | None = None  # None = rest of horizon
    magnitude: float = 0.0
    weight_field: str = "cost_per_unit"  # for edge_noise

    def validate(self) -> None:
        if self.kind not in DISTURBANCE_KINDS:
            raise InvalidAttribute(f"unknown disturbance kind {self.kind!r}")
        if self.kind == "capacity_scale" and not (0.0 <= self.magnitude <= 1.0):
            raise InvalidAttribute("capacity_scale magnitude must be in [0, 1]")
        import math
        if not math.isfinite(self.magnitude):
            raise InvalidAttribute("disturbance magnitude must be finite")
        if self.end is not None and self.end <= self.start:
            raise InvalidAttribute("disturbance range must be non-empty")

    def active_at(self, tick: int) -> bool:
        if tick < self.start:
            return False
        return self.end is None or tick < self.end

    def to_dict(self) -> dict[str, Any]:
        return {"target": self.target, "kind": self.kind, "start": self.start,
                "end": self.end, "magnitude": self.magnitude,
                "weight_field": self.weight_field}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Disturbance":
        dist = cls(
            target=d["target"],
            kind=d["kind"],
            start=int(d.get("start", 0)),
            end=None if d.get("end") is None else int(d["end"]),
            magnitude=float(d.get("magnitude", 0.0)),
            weight_field=d.get("weight_field", "cost_per_unit"),
        )
        dist.validate()
        return dist


def _int_map(raw: dict | None) -> dict[int, int]:
    return {int(k): int(v) for k, v in (raw or {}).items()}


@dataclass
class Scenario:
    """A script for one simulation world."""

    name: str = "base"
    disturbances: list[Disturbance] = field(default_factory=list)
    supply_schedule: dict[str, dict[int, int]] = field(default_factory=dict)
    demand_profile: dict[str, dict[int, int]] = field(default_factory=dict)
    initial_inventory: dict[str, int] = field(default_factory=dict)
    production_limits: dict[str, int] = field(default_factory=dict)
    lost_sales: set[str] = field(default_factory=set)  # customers w/o backlog carry

    def validate(self) -> None:
        for d in self.disturbances:
            d.validate()
        for sched in (self.supply_schedule, self.demand_profile):
            for node, per_tick in sched.items():
                for t, q in per_tick.items():
                    if t < 0 or q < 0:
                        raise InvalidAttribute(
                            f"schedule entry ({node}, {t}, {q}) must be non-negative")
        for node, inv in self.initial_inventory.items():
            if inv < 0:
                raise InvalidAttribute(f"initial inventory for {node} must be >= 0")

    def supply_at(self, node_id: str, tick: int) -> int:
        return self.supply_schedule.get(node_id, {}).get(tick, 0)

    def demand_at(self, node_id: str, tick: int) -> int:
        return self.demand_profile.get(node_id, {}).get(tick, 0)

    def total_supply(self, horizon: int) -> int:
        return sum(q for sched in self.supply_schedule.values()
                   for t, q in sched.items() if 0 <= t < horizon)

    def total_demand(self, horizon: int) -> int:
        return sum(q for sched in self.demand_profile.values()
                   for t, q in sched.items() if 0 <= t < horizon)

    def copy(self) -> "Scenario":
        return copy.deepcopy(self)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "disturbances": [d.to_dict() for d in self.disturbances],
            "supply": {n: {str(t): q for t, q in sorted(s.items())}
                       for n, s in sorted(self.supply_schedule.items())},
            "demand": {n: {str(t): q for t, q in sorted(s.items())}
                       for n, s in sorted(self.demand_profile.items())},
            "initial_inventory": dict(sorted(self.initial_inventory.items())),
            "production_limits": dict(sorted(self.production_limits.items())),
            "lost_sales": sorted(self.lost_sales),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Scenario":
        sc = cls(
            name=d.get("name", "base"),
            disturbances=[Disturbance.from_dict(x) for x in d.get("disturbances", [])],
            supply_schedule={n: _int_map(s) for n, s in (d.get("supply") or {}).items()},
            demand_profile={n: _int_map(s) for n, s in (d.get("demand") or {}).items()},
            initial_inventory={n: int(v) for n, v in (d.get("initial_inventory") or {}).items()},
            production_limits={n: int(v) for n, v in (d.get("production_limits") or {}).items()},
            lost_sales=set(d.get("lost_sales") or []),
        )
        sc.validate()
        return sc

    @classmethod
    def from_yaml(cls, path: str | Path) -> "Scenario":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(yaml.safe_load(fh) or {})

    def to_yaml(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            yaml.safe_dump(self.to_dict(), fh, sort_keys=True)


@dataclass
class SimConfig:
    """Run parameters: horizon T, seed, and named update rules."""

    horizon: int = 0
    seed: int = 0
    state_update_hook: str = "flow_balance"
    influence_rule: str = "weighted_sum"
    base_tick: int = 0  # timeline tick the run snapshots from

    def validate(self) -> None:
        if self.horizon < 0:
            raise InvalidAttribute("horizon must be >= 0")
