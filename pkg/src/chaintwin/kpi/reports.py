"""KPI suite computed from traces: costs, service, lead times, inventory,
carbon and utilization.

Conventions: service level counts demand met at its requested tick; backlog
filled later lands in the fill rate instead. A window with zero demand has
service level 1. Carbon is activity-based: per-unit transport factors on
flows plus per-unit production factors on injected units. Sum-type KPIs
compose exactly across adjacent windows; ratio KPIs recompute from the
composed numerators and denominators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from ..errors import WindowOutOfRange
from ..sim.cost import CostModel, evaluate_cost
from ..sim.engine import SimTrace


def nearest_rank(values: list[float], pct: float) -> float:
    """Nearest-rank percentile over a non-empty sorted multiset."""
    if not values:
        return 0.0
    ordered = sorted(values)
    k = max(1, math.ceil(pct / 100.0 * len(ordered)))
    return float(ordered[k - 1])


@dataclass
class KpiReport:
    window: tuple[int, int]
    total_cost: float
    cost_terms: dict[str, float]
    demand_requested: int
    demand_on_time: int
    demand_late: int
    demand_lost: int
    service_level: float
    fill_rate: float
    lead_time_mean: float
    lead_time_p50: float
    lead_time_p90: float
    lead_time_max: float
    inventory_by_kind: dict[str, dict[str, float]]
    carbon_total: float
    carbon_transport: float
    carbon_production: float
    carbon_by_element: dict[str, float]
    utilization: dict[str, float]
    shipped_units: int
    unmet_demand: int
    extras: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "window": list(self.window),
            "total_cost": self.total_cost,
            "cost_terms": {k: self.cost_terms[k] for k in sorted(self.cost_terms)},
            "demand_requested": self.demand_requested,
            "demand_on_time": self.demand_on_time,
            "demand_late": self.demand_late,
            "demand_lost": self.demand_lost,
            "service_level": self.service_level,
            "fill_rate": self.fill_rate,
            "lead_time_mean": self.lead_time_mean,
            "lead_time_p50": self.lead_time_p50,
            "lead_time_p90": self.lead_time_p90,
            "lead_time_max": self.lead_time_max,
            "inventory_by_kind": {k: dict(v) for k, v in
                                  sorted(self.inventory_by_kind.items())},
            "carbon_total": self.carbon_total,
            "carbon_transport": self.carbon_transport,
            "carbon_production": self.carbon_production,
            "carbon_by_element": dict(sorted(self.carbon_by_element.items())),
            "utilization": dict(sorted(self.utilization.items())),
            "shipped_units": self.shipped_units,
            "unmet_demand": self.unmet_demand,
        }


def _check_window(trace: SimTrace, window: tuple[int, int] | None) -> tuple[int, int]:
    if window is None:
        return (0, trace.horizon)
    lo, hi = window
    if lo < 0 or hi > trace.horizon or lo > hi:
        raise WindowOutOfRange(
            f"window [{lo}, {hi}) outside trace horizon {trace.horizon}")
    return (lo, hi)


def carbon_footprint(trace: SimTrace, snapshot, window: tuple[int, int] | None = None
                     ) -> tuple[float, dict[str, Any]]:
    """Total kg CO2e over the window plus per-element breakdown.

    Transport: flow units times the edge's per-unit factor at that tick.
    Production: injected units times the node's carbon_intensity attribute.
    """
    lo, hi = _check_window(trace, window)
    transport = 0.0
    production = 0.0
    by_element: dict[str, float] = {}
    for t in range(lo, hi):
        for fl in trace.flows[t]:
            kg = fl.quantity * fl.unit_carbon
            transport += kg
            by_element[fl.edge_id] = by_element.get(fl.edge_id, 0.0) + kg
        for nid, qty in trace.supply_applied[t].items():
            intensity = snapshot.nodes[nid].attrs.get("carbon_intensity", 0.0) \
                if nid in snapshot.nodes else 0.0
            kg = qty * intensity
            production += kg
            if kg:
                by_element[nid] = by_element.get(nid, 0.0) + kg
    total = transport + production
    return total, {"transport": transport, "production": production,
                   "by_element": by_element}


def compute_kpis(trace: SimTrace, snapshot, cost_model: CostModel,
                 window: tuple[int, int] | None = None) -> KpiReport:
    lo, hi = _check_window(trace, window)
    cost = evaluate_cost(trace, cost_model, (lo, hi))

    requested = on_time = late = lost = 0
    for t in range(lo, hi):
        for rec in trace.demand[t]:
            requested += rec.requested
            on_time += rec.served_on_time
            late += rec.served_late
            lost += rec.lost
    service_level = 1.0 if requested == 0 else on_time / requested
    fill_rate = 1.0 if requested == 0 else (on_time + late) / requested

    leads = [float(b.serve_tick - b.order_tick) for b in trace.fulfilled
             if lo <= b.serve_tick < hi]
    lead_mean = sum(leads) / len(leads) if leads else 0.0

    by_kind: dict[str, list[int]] = {}
    for t in range(lo, hi):
        for nid, sv in trace.states[t].items():
            kind = snapshot.nodes[nid].kind.value if nid in snapshot.nodes else "unknown"
            by_kind.setdefault(kind, []).append(sv.inventory)
    inventory_by_kind = {
        kind: {"mean": sum(vals) / len(vals), "min": float(min(vals)),
               "max": float(max(vals))}
        for kind, vals in by_kind.items() if vals}

    carbon_total, carbon_parts = carbon_footprint(trace, snapshot, (lo, hi))

    flow_sum: dict[str, int] = {}
    cap_sum: dict[str, int] = {}
    for t in range(lo, hi):
        for fl in trace.flows[t]:
            flow_sum[fl.edge_id] = flow_sum.get(fl.edge_id, 0) + fl.quantity
        for eid, w in trace.edge_weights[t].items():
            cap_sum[eid] = cap_sum.get(eid, 0) + int(w.get("capacity_effective", 0))
    utilization: dict[str, float] = {}
    for eid in sorted(set(flow_sum) | set(cap_sum)):
        cap = cap_sum.get(eid, 0)
        utilization[eid] = (flow_sum.get(eid, 0) / cap) if cap > 0 else 0.0
    for nid in snapshot.node_ids():
        cap = snapshot.nodes[nid].attrs.get("capacity", 0.0)
        if cap > 0:
            produced = sum(trace.production_applied[t].get(nid, 0)
                           for t in range(lo, hi))
            utilization[nid] = produced / (cap * max(1, hi - lo))

    shipped = sum(fl.quantity for t in range(lo, hi) for fl in trace.flows[t])
    backlog_end = sum(sv.backlog for sv in trace.states[hi].values())

    return KpiReport(
        window=(lo, hi),
        total_cost=cost.total,
        cost_terms=dict(cost.per_term),
        demand_requested=requested,
        demand_on_time=on_time,
        demand_late=late,
        demand_lost=lost,
        service_level=service_level,
        fill_rate=fill_rate,
        lead_time_mean=lead_mean,
        lead_time_p50=nearest_rank(leads, 50),
        lead_time_p90=nearest_rank(leads, 90),
        lead_time_max=max(leads) if leads else 0.0,
        inventory_by_kind=inventory_by_kind,
        carbon_total=carbon_total,
        carbon_transport=carbon_parts["transport"],
        carbon_production=carbon_parts["production"],
        carbon_by_element=carbon_parts["by_element"],
        utilization=utilization,
        shipped_units=shipped,
        unmet_demand=backlog_end + lost,
    )


def kpi_series(trace: SimTrace, snapshot, cost_model: CostModel,
               stride: int) -> list[KpiReport]:
    """Non-overlapping, exhaustive stride windows over the trace."""
    if stride < 1:
        raise WindowOutOfRange("stride must be >= 1")
    reports = []
    lo = 0
    while lo < trace.horizon:
        hi = min(lo + stride, trace.horizon)
        reports.append(compute_kpis(trace, snapshot, cost_model, (lo, hi)))
        lo = hi
    return reports
