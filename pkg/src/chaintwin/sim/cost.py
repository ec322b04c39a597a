"""Cost functional over a simulation trace.

J sums, for t = 0..T-1, per-node operational cost (holding + backlog +
control actions) and per-edge transportation cost (unit cost at that tick
times units shipped). The per-tick, per-term breakdown always re-sums to J
exactly because J is defined as the sum of the breakdown.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import IncompleteTrace

COST_TERMS = ("holding", "backlog", "action", "transport")


@dataclass
class CostModel:
    """Linear rates: per-node holding/backlog/action, per-edge from weights."""

    default_holding_rate: float = 1.0
    default_backlog_rate: float = 10.0
    default_action_rate: float = 0.0
    holding_rate: dict[str, float] = field(default_factory=dict)
    backlog_rate: dict[str, float] = field(default_factory=dict)
    action_rate: dict[str, float] = field(default_factory=dict)

    def holding(self, node_id: str) -> float:
        return self.holding_rate.get(node_id, self.default_holding_rate)

    def backlog(self, node_id: str) -> float:
        return self.backlog_rate.get(node_id, self.default_backlog_rate)

    def action(self, node_id: str) -> float:
        return self.action_rate.get(node_id, self.default_action_rate)

    def to_dict(self) -> dict:
        return {
            "default_holding_rate": self.default_holding_rate,
            "default_backlog_rate": self.default_backlog_rate,
            "default_action_rate": self.default_action_rate,
            "holding_rate": dict(sorted(self.holding_rate.items())),
            "backlog_rate": dict(sorted(self.backlog_rate.items())),
            "action_rate": dict(sorted(self.action_rate.items())),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CostModel":
        return cls(
            default_holding_rate=float(d.get("default_holding_rate", 1.0)),
            default_backlog_rate=float(d.get("default_backlog_rate", 10.0)),
            default_action_rate=float(d.get("default_action_rate", 0.0)),
            holding_rate={k: float(v) for k, v in (d.get("holding_rate") or {}).items()},
            backlog_rate={k: float(v) for k, v in (d.get("backlog_rate") or {}).items()},
            action_rate={k: float(v) for k, v in (d.get("action_rate") or {}).items()},
        )


@dataclass
class CostBreakdown:
    total: float
    per_term: dict[str, float]
    per_tick: list[dict[str, float]]

    def to_dict(self) -> dict:
        return {"total": self.total,
                "per_term": {k: self.per_term[k] for k in COST_TERMS},
                "per_tick": self.per_tick}


def evaluate_cost(trace, cost_model: CostModel,
                  window: tuple[int, int] | None = None) -> CostBreakdown:
    """Evaluate J (with breakdown) over a trace, optionally over [lo, hi) ticks."""
    horizon = trace.horizon
    if len(trace.states) != horizon + 1:
        raise IncompleteTrace(
            f"trace has {len(trace.states)} states, expected {horizon + 1}")
    lo, hi = window if window is not None else (0, horizon)
    per_tick: list[dict[str, float]] = []
    per_term = {term: 0.0 for term in COST_TERMS}
    for t in range(lo, hi):
        state = trace.states[t]
        tick_cost = {term: 0.0 for term in COST_TERMS}
        for nid in sorted(state):
            sv = state[nid]
            tick_cost["holding"] += cost_model.holding(nid) * sv.inventory
            tick_cost["backlog"] += cost_model.backlog(nid) * sv.backlog
        for action in trace.controls[t]:
            if action.kind in ("produce", "order"):
                tick_cost["action"] += cost_model.action(action.node_id) * action.quantity
        for fl in trace.flows[t]:
            tick_cost["transport"] += fl.unit_cost * fl.quantity
        for term in COST_TERMS:
            per_term[term] += tick_cost[term]
        per_tick.append(tick_cost)
    total = sum(per_term[term] for term in COST_TERMS)
    return CostBreakdown(total=total, per_term=per_term, per_tick=per_tick)
