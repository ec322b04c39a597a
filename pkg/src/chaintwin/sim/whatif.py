"""What-if runs: same seed, base vs patched scenario, KPI delta.

Pure with respect to the timeline: nothing is committed; both runs
materialize from the same snapshot.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .cost import CostModel
from .engine import SimTrace, run
from .scenario import Disturbance, Scenario, SimConfig


@dataclass
class WhatIfResult:
    base_trace: SimTrace
    patched_trace: SimTrace
    base_kpis: dict[str, Any]
    patched_kpis: dict[str, Any]
    delta: dict[str, Any]


def apply_patch(scenario: Scenario, patch: dict[str, Any]) -> Scenario:
    """Return a patched copy: added disturbances and schedule edits."""
    out = scenario.copy()
    for d in patch.get("add_disturbances", []):
        out.disturbances.append(
            d if isinstance(d, Disturbance) else Disturbance.from_dict(d))
    for node, edits in (patch.get("demand_edits") or {}).items():
        sched = out.demand_profile.setdefault(node, {})
        for t, q in edits.items():
            sched[int(t)] = int(q)
    for node, edits in (patch.get("supply_edits") or {}).items():
        sched = out.supply_schedule.setdefault(node, {})
        for t, q in edits.items():
            sched[int(t)] = int(q)
    for node, inv in (patch.get("initial_inventory") or {}).items():
        out.initial_inventory[node] = int(inv)
    if patch.get("name"):
        out.name = patch["name"]
    out.validate()
    return out


def _numeric_delta(base: Any, patched: Any) -> Any:
    if isinstance(base, dict) and isinstance(patched, dict):
        return {k: _numeric_delta(base.get(k, 0), patched.get(k, 0))
                for k in sorted(set(base) | set(patched))}
    if isinstance(base, (int, float)) and isinstance(patched, (int, float)):
        return patched - base
    return None


def what_if(timeline_or_snapshot, base_scenario: Scenario,
            patch: dict[str, Any], config: SimConfig, policy=None,
            cost_model: CostModel | None = None) -> WhatIfResult:
    from ..kpi.reports import compute_kpis  # local: kpi depends on sim

    cost_model = cost_model or CostModel()
    patched_scenario = apply_patch(base_scenario, patch)
    base_trace = run(timeline_or_snapshot, base_scenario, config, policy)
    patched_trace = run(timeline_or_snapshot, patched_scenario, config, policy)
    if isinstance(timeline_or_snapshot, SimTrace):  # defensive; not expected
        raise TypeError("expected timeline or snapshot")
    snap = (timeline_or_snapshot
            if hasattr(timeline_or_snapshot, "nodes")
            else timeline_or_snapshot.snapshot_at(config.base_tick))
    base_kpis = compute_kpis(base_trace, snap, cost_model).to_dict()
    patched_kpis = compute_kpis(patched_trace, snap, cost_model).to_dict()
    return WhatIfResult(
        base_trace=base_trace,
        patched_trace=patched_trace,
        base_kpis=base_kpis,
        patched_kpis=patched_kpis,
        delta=_numeric_delta(base_kpis, patched_kpis),
    )
