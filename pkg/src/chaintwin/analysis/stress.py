"""Ablation-based stress testing: rank elements by the damage their outage does.

For every candidate node or edge, the scenario is re-run with that element
outaged for the whole horizon (same seed, same policy) and compared against
the shared baseline: delta unmet demand, delta cost J, and how many
customers lose all supply routes. Ranking is worst-first.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from ..graph.snapshot import GraphSnapshot
from ..graph.types import EntityKind, LayerKind
from ..sim.cost import CostModel, evaluate_cost
from ..sim.engine import run
from ..sim.scenario import Disturbance, Scenario, SimConfig


@dataclass
class StressRow:
    element_id: str
    delta_unmet_demand: int
    delta_cost: float
    disconnected_customers: int

    def to_dict(self) -> dict:
        return {"element_id": self.element_id,
                "delta_unmet_demand": self.delta_unmet_demand,
                "delta_cost": self.delta_cost,
                "disconnected_customers": self.disconnected_customers}


@dataclass
class StressReport:
    baseline_unmet: int
    baseline_cost: float
    rows: list[StressRow] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"baseline_unmet": self.baseline_unmet,
                "baseline_cost": self.baseline_cost,
                "rows": [r.to_dict() for r in self.rows]}


def _supply_roots(snapshot: GraphSnapshot, scenario: Scenario) -> set[str]:
    roots = set()
    for nid, node in snapshot.nodes.items():
        inv = scenario.initial_inventory.get(nid, node.state.inventory)
        if inv > 0 or any(q > 0 for q in scenario.supply_schedule.get(nid, {}).values()):
            roots.add(nid)
    return roots


def _disconnected_customers(snapshot: GraphSnapshot, scenario: Scenario,
                            removed: str) -> int:
    """Customers with no material route from any supply root, after removal."""
    roots = _supply_roots(snapshot, scenario) - {removed}
    adj: dict[str, list[str]] = {}
    for e in snapshot.layer_edges(LayerKind.MATERIAL):
        if e.id == removed or e.src == removed or e.dst == removed:
            continue
        adj.setdefault(e.src, []).append(e.dst)
    seen = set(roots)
    queue = deque(sorted(roots))
    while queue:
        v = queue.popleft()
        for w in adj.get(v, []):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    count = 0
    for nid, node in snapshot.nodes.items():
        if node.kind != EntityKind.CUSTOMER or nid == removed:
            continue
        demands = any(q > 0 for q in scenario.demand_profile.get(nid, {}).values())
        if demands and nid not in seen and nid not in roots:
            count += 1
    return count


def critical_rank(timeline_or_snapshot, scenario: Scenario, config: SimConfig,
                  candidates: list[str], cost_model: CostModel | None = None,
                  policy=None) -> StressReport:
    cost_model = cost_model or CostModel()
    snap = (timeline_or_snapshot
            if isinstance(timeline_or_snapshot, GraphSnapshot)
            else timeline_or_snapshot.snapshot_at(config.base_tick))
    base_trace = run(snap, scenario, config, policy)
    base_unmet = base_trace.total_unmet_demand()
    base_cost = evaluate_cost(base_trace, cost_model).total

    rows = []
    for cid in candidates:
        if cid in snap.nodes:
            kind = "node_outage"
        elif cid in snap.edges:
            kind = "edge_outage"
        else:
            continue
        patched = scenario.copy()
        patched.disturbances.append(Disturbance(
            target=cid, kind=kind, start=0, end=config.horizon or None))
        trace = run(snap, patched, config, policy)
        rows.append(StressRow(
            element_id=cid,
            delta_unmet_demand=trace.total_unmet_demand() - base_unmet,
            delta_cost=evaluate_cost(trace, cost_model).total - base_cost,
            disconnected_customers=_disconnected_customers(snap, scenario, cid),
        ))
    rows.sort(key=lambda r: (-r.delta_unmet_demand, -r.delta_cost, r.element_id))
    return StressReport(baseline_unmet=base_unmet, baseline_cost=base_cost,
                        rows=rows)
