"""Discrete-time simulation kernel.

Each tick executes a fixed pipeline:

  1. edge-weight update      w(t+1) = g(w(t), eta)  (drift, scaling, outages)
  2. policy decision         flows f_ij(t) and controls u_i(t)
  3. state update            arrivals -> supply/production -> departures ->
                             node noise (inside the state hook) -> demand

Inventory follows the flow-balance law: next inventory equals current
inventory plus inflows minus outflows plus local supply. Units shipped over
an edge with transit time d are held in an in-transit buffer and credited to
the destination d ticks later. Material quantities are integers and the
engine asserts exact conservation at the end of every run.

Everything is deterministic for a fixed seed: iteration orders are sorted,
and noise draws are keyed by (seed, target, tick), never by draw order.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Any, Callable

from .. import rng as crng
from ..errors import (
    CapacityExceeded,
    InvalidAttribute,
    NegativeInventoryUnclamped,
)
from ..graph.snapshot import GraphSnapshot
from ..graph.types import EntityKind, LayerKind, StateVector
from .scenario import ControlAction, FlowAssignment, Scenario, SimConfig


@dataclass
class AppliedFlow:
    """A flow as actually executed, with the tick's edge weights attached."""

    edge_id: str
    tick: int
    quantity: int
    src: str
    dst: str
    unit_cost: float
    unit_carbon: float
    capacity: int
    arrival_tick: int

    def to_dict(self) -> dict[str, Any]:
        return {"edge_id": self.edge_id, "tick": self.tick,
                "quantity": self.quantity, "src": self.src, "dst": self.dst,
                "unit_cost": self.unit_cost, "unit_carbon": self.unit_carbon,
                "capacity": self.capacity, "arrival_tick": self.arrival_tick}


@dataclass
class DemandRecord:
    customer: str
    tick: int
    requested: int
    served_on_time: int = 0
    served_late: int = 0
    lost: int = 0
    backlog_after: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {"customer": self.customer, "tick": self.tick,
                "requested": self.requested,
                "served_on_time": self.served_on_time,
                "served_late": self.served_late, "lost": self.lost,
                "backlog_after": self.backlog_after}


@dataclass
class FulfilledBatch:
    customer: str
    order_tick: int
    serve_tick: int
    quantity: int


@dataclass
class SimTrace:
    """Complete record of one run: states per tick plus everything applied."""

    horizon: int
    seed: int
    states: list[dict[str, StateVector]] = field(default_factory=list)
    flows: list[list[AppliedFlow]] = field(default_factory=list)
    controls: list[list[ControlAction]] = field(default_factory=list)
    demand: list[list[DemandRecord]] = field(default_factory=list)
    supply_applied: list[dict[str, int]] = field(default_factory=list)
    production_applied: list[dict[str, int]] = field(default_factory=list)
    noise_applied: list[dict[str, int]] = field(default_factory=list)
    losses: list[dict[str, int]] = field(default_factory=list)
    arrivals: list[dict[str, int]] = field(default_factory=list)
    edge_weights: list[dict[str, dict[str, float]]] = field(default_factory=list)
    active_disturbances: list[list[str]] = field(default_factory=list)
    violations: list[dict[str, Any]] = field(default_factory=list)
    fulfilled: list[FulfilledBatch] = field(default_factory=list)
    in_transit_end: list[tuple[int, str, str, int]] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)

    def total_unmet_demand(self) -> int:
        """Units of demand never served within the horizon (incl. lost)."""
        backlog_left = sum(sv.backlog for sv in self.states[-1].values())
        lost = sum(rec.lost for per_tick in self.demand for rec in per_tick)
        return backlog_left + lost

    def to_dict(self) -> dict[str, Any]:
        return {
            "horizon": self.horizon,
            "seed": self.seed,
            "states": [{nid: sv.to_dict() for nid, sv in sorted(st.items())}
                       for st in self.states],
            "flows": [[f.to_dict() for f in per_tick] for per_tick in self.flows],
            "controls": [[c.to_dict() for c in per_tick] for per_tick in self.controls],
            "demand": [[r.to_dict() for r in per_tick] for per_tick in self.demand],
            "supply_applied": self.supply_applied,
            "production_applied": self.production_applied,
            "noise_applied": self.noise_applied,
            "losses": self.losses,
            "arrivals": self.arrivals,
            "edge_weights": self.edge_weights,
            "active_disturbances": self.active_disturbances,
            "violations": self.violations,
            "fulfilled": [{"customer": b.customer, "order_tick": b.order_tick,
                           "serve_tick": b.serve_tick, "quantity": b.quantity}
                          for b in self.fulfilled],
            "in_transit_end": [list(x) for x in self.in_transit_end],
            "summary": self.summary,
        }

    def digest(self) -> str:
        import hashlib
        import json
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SimTrace":
        tr = cls(horizon=int(d["horizon"]), seed=int(d.get("seed", 0)))
        tr.states = [{nid: StateVector.from_dict(sv) for nid, sv in st.items()}
                     for st in d.get("states", [])]
        tr.flows = [[AppliedFlow(**f) for f in per] for per in d.get("flows", [])]
        tr.controls = [[ControlAction.from_dict(c) for c in per]
                       for per in d.get("controls", [])]
        tr.demand = [[DemandRecord(**r) for r in per] for per in d.get("demand", [])]
        tr.supply_applied = d.get("supply_applied", [])
        tr.production_applied = d.get("production_applied", [])
        tr.noise_applied = d.get("noise_applied", [])
        tr.losses = d.get("losses", [])
        tr.arrivals = d.get("arrivals", [])
        tr.edge_weights = d.get("edge_weights", [])
        tr.active_disturbances = d.get("active_disturbances", [])
        tr.violations = d.get("violations", [])
        tr.fulfilled = [FulfilledBatch(**b) for b in d.get("fulfilled", [])]
        tr.in_transit_end = [tuple(x) for x in d.get("in_transit_end", [])]
        tr.summary = d.get("summary", {})
        return tr

    def total_served(self) -> int:
        return sum(r.served_on_time + r.served_late
                   for per_tick in self.demand for r in per_tick)

    def total_shipped(self) -> int:
        return sum(f.quantity for per_tick in self.flows for f in per_tick)

    def unmet_by_customer(self) -> dict[str, int]:
        """Final backlog plus lost sales, per customer with any demand."""
        out: dict[str, int] = {}
        for per_tick in self.demand:
            for rec in per_tick:
                out.setdefault(rec.customer, 0)
                out[rec.customer] += rec.lost
        for nid, sv in self.states[-1].items():
            if sv.backlog > 0 or nid in out:
                out[nid] = out.get(nid, 0) + sv.backlog
        return {k: v for k, v in sorted(out.items())}


# ---------------------------------------------------------------------------
# pluggable rules

def _influence_weighted_sum(run: "SimulationRun", tick: int, node_id: str) -> float:
    """Default influence: sum of reliability-weighted neighbor inventories."""
    total = 0.0
    for eid in run.out_edges.get(node_id, []):
        edge = run.snapshot.edges[eid]
        if edge.layer != LayerKind.MATERIAL:
            continue
        w = run.weights[eid]
        total += w["reliability"] * run.inventory[edge.dst]
    return total


INFLUENCE_RULES: dict[str, Callable[["SimulationRun", int, str], float]] = {
    "weighted_sum": _influence_weighted_sum,
}


def _hook_flow_balance(run: "SimulationRun", tick: int, node_id: str,
                       inventory: int, noise: int, influence: float) -> int:
    return inventory + noise


def _hook_influence_tracking(run: "SimulationRun", tick: int, node_id: str,
                             inventory: int, noise: int, influence: float) -> int:
    # conservation-preserving variant that records the influence term
    run.custom_state.setdefault(node_id, {})["influence"] = influence
    return inventory + noise


STATE_HOOKS: dict[str, Callable[["SimulationRun", int, str, int, int, float], int]] = {
    "flow_balance": _hook_flow_balance,
    "influence_tracking": _hook_influence_tracking,
}


# ---------------------------------------------------------------------------
# policies

class FixedPlanPolicy:
    """Execute a pre-computed plan; infeasible quantities are clipped and the
    violation recorded instead of aborting the run."""

    clip = True

    def __init__(self, flows_by_tick: dict[int, list[FlowAssignment]],
                 controls_by_tick: dict[int, list[ControlAction]] | None = None):
        self.flows_by_tick = flows_by_tick
        self.controls_by_tick = controls_by_tick or {}

    def decide(self, run: "SimulationRun", tick: int):
        flows = sorted(self.flows_by_tick.get(tick, []), key=lambda f: f.edge_id)
        controls = sorted(self.controls_by_tick.get(tick, []),
                          key=lambda c: c.node_id)
        return flows, controls


class GreedyPolicy:
    """Myopic shipping rule: each tick, push available stock one hop along
    the currently cheapest residual path toward the neediest customers
    (customers ordered by id, sources by distance then id, first-hop ties by
    edge id). Customers never ship. An optional lookahead widens the demand
    window a customer's need is computed over (0 = strictly myopic)."""

    clip = False

    def __init__(self, lookahead: int = 0):
        self.lookahead = lookahead

    def decide(self, run: "SimulationRun", tick: int):
        snap = run.snapshot
        eff_caps = run.current_caps
        residual = dict(eff_caps)
        avail: dict[str, int] = {}
        for nid in snap.node_ids():
            if snap.nodes[nid].kind == EntityKind.CUSTOMER:
                continue
            if run.is_node_outaged(nid, tick):
                continue
            avail[nid] = (run.inventory[nid]
                          + run.arrivals_due(tick).get(nid, 0)
                          + run.supply_due(nid, tick))
        inbound = run.inbound_in_transit()
        flows: list[FlowAssignment] = []
        for cust in sorted(run.demand_customers()):
            if cust not in snap.nodes:
                continue
            horizon = run.config.horizon
            wanted = sum(run.scenario.demand_at(cust, tau)
                         for tau in range(tick, min(tick + self.lookahead, horizon - 1) + 1))
            # inbound already includes units arriving this tick
            projected = (run.backlog_total(cust) + wanted
                         - run.inventory[cust]
                         - inbound.get(cust, 0))
            need = max(0, projected)
            guard = 0
            while need > 0 and guard < 4 * max(1, len(snap.edges)):
                guard += 1
                dist, next_edge = self._paths_toward(run, cust, residual, tick)
                candidates = [u for u, q in avail.items()
                              if q > 0 and u != cust and u in dist]
                if not candidates:
                    break
                u = min(candidates, key=lambda x: (dist[x], x))
                eid = next_edge[u]
                qty = min(avail[u], residual.get(eid, 0), need)
                if qty <= 0:
                    break
                flows.append(FlowAssignment(edge_id=eid, tick=tick, quantity=qty))
                avail[u] -= qty
                residual[eid] = residual.get(eid, 0) - qty
                need -= qty
        merged: dict[str, int] = {}
        for f in flows:
            merged[f.edge_id] = merged.get(f.edge_id, 0) + f.quantity
        return ([FlowAssignment(edge_id=eid, tick=tick, quantity=q)
                 for eid, q in sorted(merged.items())], [])

    @staticmethod
    def _paths_toward(run: "SimulationRun", target: str,
                      residual: dict[str, int], tick: int):
        """Reverse Dijkstra over residual material edges: distance from every
        node to `target` by cost_per_unit, plus the chosen first hop."""
        snap = run.snapshot
        dist: dict[str, float] = {target: 0.0}
        heap: list[tuple[float, str]] = [(0.0, target)]
        seen: set[str] = set()
        while heap:
            d, v = heapq.heappop(heap)
            if v in seen:
                continue
            seen.add(v)
            for eid in run.in_edges.get(v, []):
                edge = snap.edges[eid]
                if edge.layer != LayerKind.MATERIAL or residual.get(eid, 0) <= 0:
                    continue
                if not edge.live_at(tick):
                    continue
                u = edge.src
                if run.is_node_outaged(u, tick):
                    continue
                nd = d + max(0.0, run.weights[eid]["cost_per_unit"])
                if nd < dist.get(u, float("inf")):
                    dist[u] = nd
                    heapq.heappush(heap, (nd, u))
        next_edge: dict[str, str] = {}
        for u in dist:
            if u == target:
                continue
            best = None
            for eid in run.out_edges.get(u, []):
                edge = snap.edges[eid]
                if edge.layer != LayerKind.MATERIAL or residual.get(eid, 0) <= 0:
                    continue
                if not edge.live_at(tick) or edge.dst not in dist:
                    continue
                cost = max(0.0, run.weights[eid]["cost_per_unit"])
                if abs(dist[edge.dst] + cost - dist[u]) < 1e-12:
                    if best is None or eid < best:
                        best = eid
            if best is not None:
                next_edge[u] = best
        for u in [u for u in dist if u != target and u not in next_edge]:
            del dist[u]
        return dist, next_edge


# ---------------------------------------------------------------------------
# the run itself

class SimulationRun:
    def __init__(self, snapshot: GraphSnapshot, scenario: Scenario,
                 config: SimConfig, policy=None):
        config.validate()
        scenario.validate()
        if config.state_update_hook not in STATE_HOOKS:
            raise InvalidAttribute(
                f"unknown state update hook {config.state_update_hook!r}")
        if config.influence_rule not in INFLUENCE_RULES:
            raise InvalidAttribute(
                f"unknown influence rule {config.influence_rule!r}")
        self.snapshot = snapshot
        self.scenario = scenario
        self.config = config
        self.policy = policy if policy is not None else GreedyPolicy()
        self.hook = STATE_HOOKS[config.state_update_hook]
        self.influence = INFLUENCE_RULES[config.influence_rule]

        self.inventory: dict[str, int] = {}
        self.backlog_queue: dict[str, list[list[int]]] = {}  # [order_tick, qty]
        self.custom_state: dict[str, dict[str, float]] = {}
        for nid in snapshot.node_ids():
            node = snapshot.nodes[nid]
            inv = scenario.initial_inventory.get(nid, node.state.inventory)
            self.inventory[nid] = int(inv)
            self.custom_state[nid] = dict(node.state.custom)
            # pre-existing backlog predates the run: no order tick, no batch
            self.backlog_queue[nid] = (
                [[None, node.state.backlog]] if node.state.backlog > 0 else [])

        # working copy of weights, drifted in place each tick
        self.weights: dict[str, dict[str, float]] = {}
        for eid, edge in snapshot.edges.items():
            self.weights[eid] = {
                "cost_per_unit": edge.weights.cost_per_unit,
                "transit_time": edge.weights.transit_time,
                "capacity": int(edge.weights.capacity),
                "reliability": edge.weights.reliability,
                "carbon_per_unit": edge.weights.carbon_per_unit,
            }
        self.out_edges: dict[str, list[str]] = {}
        self.in_edges: dict[str, list[str]] = {}
        for eid in sorted(snapshot.edges):
            edge = snapshot.edges[eid]
            self.out_edges.setdefault(edge.src, []).append(eid)
            self.in_edges.setdefault(edge.dst, []).append(eid)

        self.pipeline: dict[int, list[tuple[str, str, int]]] = {}  # arrival -> [(eid, dst, qty)]
        self.current_caps: dict[str, int] = {}
        self.trace = SimTrace(horizon=config.horizon, seed=config.seed)
        self.trace.states.append(self._state_snapshot())
        self._consumed_total = 0
        self._supply_total = 0
        self._noise_total = 0

    # -------------------------------------------------- accessors for policies

    def arrivals_due(self, tick: int) -> dict[str, int]:
        due: dict[str, int] = {}
        for eid, dst, qty in self.pipeline.get(tick, []):
            due[dst] = due.get(dst, 0) + qty
        return due

    def supply_due(self, node_id: str, tick: int) -> int:
        if self.is_node_outaged(node_id, tick):
            return 0
        return self.scenario.supply_at(node_id, tick)

    def inbound_in_transit(self) -> dict[str, int]:
        inbound: dict[str, int] = {}
        for entries in self.pipeline.values():
            for _, dst, qty in entries:
                inbound[dst] = inbound.get(dst, 0) + qty
        return inbound

    def backlog_total(self, node_id: str) -> int:
        return sum(q for _, q in self.backlog_queue.get(node_id, []))

    def demand_customers(self) -> list[str]:
        with_backlog = [n for n, q in self.backlog_queue.items() if q]
        return sorted(set(self.scenario.demand_profile) | set(with_backlog))

    def is_node_outaged(self, node_id: str, tick: int) -> bool:
        for d in self.scenario.disturbances:
            if d.kind == "node_outage" and d.target == node_id and d.active_at(tick):
                return True
        return False

    # -------------------------------------------------- per-tick phases

    def update_edge_weights(self, tick: int) -> dict[str, int]:
        """Apply weight drift and compute effective per-tick capacities.

        Drift (edge_noise) is a persistent random walk on one weight field;
        capacity_scale and outages are transient, applying only while active.
        Returns the effective capacity per edge for this tick.
        """
        seed = self.config.seed
        for eid in sorted(self.weights):
            edge = self.snapshot.edges[eid]
            w = self.weights[eid]
            for idx, d in enumerate(self.scenario.disturbances):
                if d.kind != "edge_noise" or d.target != eid or not d.active_at(tick):
                    continue
                eta = crng.symmetric_float(seed, eid, tick, d.magnitude,
                                           stream=f"eta{idx}:{d.weight_field}")
                field_name = d.weight_field
                drifted = w[field_name] * (1.0 + eta)
                w[field_name] = self._clamp_weight(edge.layer, field_name, drifted)
        caps: dict[str, int] = {}
        for eid in sorted(self.weights):
            edge = self.snapshot.edges[eid]
            cap = int(self.weights[eid]["capacity"])
            for d in self.scenario.disturbances:
                if d.target != eid or not d.active_at(tick):
                    continue
                if d.kind == "capacity_scale":
                    cap = int(cap * d.magnitude)
                elif d.kind == "edge_outage":
                    cap = 0
            if (self.is_node_outaged(edge.src, tick)
                    or self.is_node_outaged(edge.dst, tick)):
                cap = 0
            caps[eid] = max(0, cap)
        self.current_caps = caps
        return caps

    @staticmethod
    def _clamp_weight(layer: LayerKind, field_name: str, value: float) -> float:
        if field_name == "cost_per_unit":
            return value if layer == LayerKind.FINANCIAL else max(0.0, value)
        if field_name == "transit_time":
            floor = 1.0 if layer == LayerKind.MATERIAL else 0.0
            return max(floor, value)
        if field_name == "capacity":
            return float(max(0, int(value)))
        if field_name == "reliability":
            return min(1.0, max(0.0, value))
        if field_name == "carbon_per_unit":
            return max(0.0, value)
        return value

    def step(self, tick: int, flows: list[FlowAssignment],
             controls: list[ControlAction]) -> dict[str, Any]:
        """Advance one tick: arrivals, supply, departures, noise, demand."""
        snap = self.snapshot
        clip = getattr(self.policy, "clip", False)
        seed = self.config.seed
        eff_caps = self.current_caps

        arrivals: dict[str, int] = {}
        for eid, dst, qty in self.pipeline.pop(tick, []):
            self.inventory[dst] += qty
            arrivals[dst] = arrivals.get(dst, 0) + qty

        supply_applied: dict[str, int] = {}
        production_applied: dict[str, int] = {}
        applied_controls: list[ControlAction] = []
        for nid in snap.node_ids():
            sched = self.scenario.supply_at(nid, tick)
            if sched > 0 and not self.is_node_outaged(nid, tick):
                self.inventory[nid] += sched
                supply_applied[nid] = supply_applied.get(nid, 0) + sched
        for action in sorted(controls, key=lambda c: (c.node_id, c.kind)):
            action.validate()
            if action.node_id not in snap.nodes:
                self.trace.violations.append(
                    {"tick": tick, "kind": "unknown_node", "id": action.node_id})
                continue
            if action.kind == "produce":
                # absent capacity attribute = no production bound
                attrs = snap.nodes[action.node_id].attrs
                cap = int(attrs["capacity"]) if "capacity" in attrs else action.quantity
                qty = action.quantity
                if self.is_node_outaged(action.node_id, tick):
                    qty = 0
                if qty > cap:
                    if not clip:
                        raise CapacityExceeded(
                            f"produce {action.quantity} exceeds capacity {cap} "
                            f"at node {action.node_id!r} tick {tick}")
                    self.trace.violations.append(
                        {"tick": tick, "kind": "production_capacity",
                         "id": action.node_id, "requested": action.quantity,
                         "allowed": cap})
                    qty = cap
                if qty > 0:
                    self.inventory[action.node_id] += qty
                    supply_applied[action.node_id] = (
                        supply_applied.get(action.node_id, 0) + qty)
                    production_applied[action.node_id] = (
                        production_applied.get(action.node_id, 0) + qty)
                applied_controls.append(ControlAction(
                    action.node_id, tick, "produce", qty))
            else:
                applied_controls.append(ControlAction(
                    action.node_id, tick, action.kind, action.quantity))

        applied_flows: list[AppliedFlow] = []
        throughput: dict[str, int] = {}
        for fl in sorted(flows, key=lambda f: f.edge_id):
            fl.validate()
            edge = snap.edges.get(fl.edge_id)
            if edge is None or edge.layer != LayerKind.MATERIAL or not edge.live_at(tick):
                if fl.quantity > 0:
                    if not clip:
                        raise CapacityExceeded(
                            f"edge {fl.edge_id!r} not usable at tick {tick}")
                    self.trace.violations.append(
                        {"tick": tick, "kind": "edge_unusable", "id": fl.edge_id,
                         "requested": fl.quantity})
                continue
            qty = fl.quantity
            cap = eff_caps.get(fl.edge_id, 0)
            if qty > cap:
                if not clip:
                    raise CapacityExceeded(
                        f"flow {qty} exceeds capacity {cap} on edge "
                        f"{fl.edge_id!r} at tick {tick}")
                self.trace.violations.append(
                    {"tick": tick, "kind": "capacity", "id": fl.edge_id,
                     "requested": qty, "allowed": cap})
                qty = cap
            have = self.inventory[edge.src]
            if qty > have:
                if not clip:
                    raise NegativeInventoryUnclamped(
                        f"flow {qty} exceeds inventory {have} at node "
                        f"{edge.src!r} tick {tick}")
                self.trace.violations.append(
                    {"tick": tick, "kind": "inventory", "id": fl.edge_id,
                     "requested": qty, "allowed": have})
                qty = have
            if qty <= 0:
                continue
            transit = max(1, round(self.weights[fl.edge_id]["transit_time"]))
            arrival = tick + transit
            self.inventory[edge.src] -= qty
            self.pipeline.setdefault(arrival, []).append((fl.edge_id, edge.dst, qty))
            throughput[edge.src] = throughput.get(edge.src, 0) + qty
            applied_flows.append(AppliedFlow(
                edge_id=fl.edge_id, tick=tick, quantity=qty, src=edge.src,
                dst=edge.dst, unit_cost=self.weights[fl.edge_id]["cost_per_unit"],
                unit_carbon=self.weights[fl.edge_id]["carbon_per_unit"],
                capacity=cap, arrival_tick=arrival))

        noise_applied: dict[str, int] = {}
        losses: dict[str, int] = {}
        for nid in snap.node_ids():
            noise = 0
            for idx, d in enumerate(self.scenario.disturbances):
                if d.kind != "node_noise" or d.target != nid or not d.active_at(tick):
                    continue
                noise += crng.symmetric_int(seed, nid, tick, int(d.magnitude),
                                            stream=f"xi{idx}")
            influence = self.influence(self, tick, nid)
            new_inv = self.hook(self, tick, nid, self.inventory[nid], noise, influence)
            if new_inv < 0:
                losses[nid] = -new_inv
                noise_applied[nid] = noise + (-new_inv)  # net effect after clamp
                new_inv = 0
            elif noise != 0:
                noise_applied[nid] = noise
            self.inventory[nid] = new_inv

        demand_records: list[DemandRecord] = []
        for cust in self.demand_customers():
            if cust not in snap.nodes:
                continue
            requested = self.scenario.demand_at(cust, tick)
            queue = self.backlog_queue[cust]
            if requested > 0:
                queue.append([tick, requested])
            rec = DemandRecord(customer=cust, tick=tick, requested=requested)
            if not self.is_node_outaged(cust, tick):
                available = self.inventory[cust]
                served = 0
                while queue and available > 0:
                    order_tick, q = queue[0]
                    take = min(q, available)
                    available -= take
                    served += take
                    if take > 0:
                        if order_tick is not None:
                            self.trace.fulfilled.append(FulfilledBatch(
                                customer=cust, order_tick=order_tick,
                                serve_tick=tick, quantity=take))
                        if order_tick == tick:
                            rec.served_on_time += take
                        else:
                            rec.served_late += take
                    if take == q:
                        queue.pop(0)
                    else:
                        queue[0][1] = q - take
                self.inventory[cust] -= served
                self._consumed_total += served
            if cust in self.scenario.lost_sales and queue:
                rec.lost = sum(q for _, q in queue)
                queue.clear()
            rec.backlog_after = self.backlog_total(cust)
            demand_records.append(rec)

        self._supply_total += sum(supply_applied.values())
        self._noise_total += sum(noise_applied.values())

        self.trace.flows.append(applied_flows)
        self.trace.controls.append(applied_controls)
        self.trace.demand.append(demand_records)
        self.trace.supply_applied.append(supply_applied)
        self.trace.production_applied.append(production_applied)
        self.trace.noise_applied.append(noise_applied)
        self.trace.losses.append(losses)
        self.trace.arrivals.append(arrivals)
        self.trace.edge_weights.append(
            {eid: dict(w, capacity_effective=eff_caps.get(eid, 0))
             for eid, w in sorted(self.weights.items())})
        self.trace.active_disturbances.append(
            [f"{d.kind}:{d.target}" for d in self.scenario.disturbances
             if d.active_at(tick)])
        self.trace.states.append(self._state_snapshot(throughput))
        return {"arrivals": arrivals, "flows": applied_flows,
                "demand": demand_records}

    def _state_snapshot(self, throughput: dict[str, int] | None = None
                        ) -> dict[str, StateVector]:
        out = {}
        for nid in self.snapshot.node_ids():
            out[nid] = StateVector(
                inventory=self.inventory[nid],
                backlog=self.backlog_total(nid),
                throughput_used=(throughput or {}).get(nid, 0),
                custom=dict(self.custom_state.get(nid, {})),
            )
        return out

    def execute(self) -> SimTrace:
        for t in range(self.config.horizon):
            self.update_edge_weights(t)
            flows, controls = self.policy.decide(self, t)
            self.step(t, flows, controls)
        for arrival in sorted(self.pipeline):
            for eid, dst, qty in self.pipeline[arrival]:
                self.trace.in_transit_end.append((arrival, eid, dst, qty))
        self._verify_conservation()
        self._summarize()
        return self.trace

    def _verify_conservation(self) -> None:
        total_end = sum(self.inventory.values())
        in_transit = sum(q for _, _, _, q in self.trace.in_transit_end)
        total_start = sum(sv.inventory for sv in self.trace.states[0].values())
        expected = (total_start + self._supply_total + self._noise_total
                    - self._consumed_total)
        if total_end + in_transit != expected:
            raise NegativeInventoryUnclamped(
                f"conservation violated: {total_end}+{in_transit} != {expected}")

    def _summarize(self) -> None:
        tr = self.trace
        tr.summary = {
            "horizon": self.config.horizon,
            "seed": self.config.seed,
            "initial_inventory": sum(sv.inventory for sv in tr.states[0].values()),
            "final_inventory": sum(self.inventory.values()),
            "in_transit_remaining": sum(q for *_, q in tr.in_transit_end),
            "supply_applied": self._supply_total,
            "noise_net": self._noise_total,
            "consumed": self._consumed_total,
            "shipped": tr.total_shipped(),
            "served_on_time": sum(r.served_on_time for recs in tr.demand for r in recs),
            "served_late": sum(r.served_late for recs in tr.demand for r in recs),
            "lost": sum(r.lost for recs in tr.demand for r in recs),
            "unmet_demand": tr.total_unmet_demand(),
            "violations": len(tr.violations),
        }


def run(timeline_or_snapshot, scenario: Scenario, config: SimConfig,
        policy=None) -> SimTrace:
    """Run a full simulation; deterministic for fixed inputs and seed."""
    if isinstance(timeline_or_snapshot, GraphSnapshot):
        snap = timeline_or_snapshot
    else:
        snap = timeline_or_snapshot.snapshot_at(config.base_tick)
    return SimulationRun(snap, scenario, config, policy).execute()


def step(snapshot: GraphSnapshot, states: dict[str, StateVector],
         flows: list[FlowAssignment], controls: list[ControlAction],
         scenario: Scenario, tick: int, seed: int = 0
         ) -> tuple[dict[str, StateVector], dict[str, Any]]:
    """One-shot single-tick update over explicit states (strict mode:
    capacity violations raise)."""
    config = SimConfig(horizon=tick + 1, seed=seed)
    sim = SimulationRun(snapshot, scenario, config, policy=None)
    for nid, sv in states.items():
        sim.inventory[nid] = sv.inventory
        sim.backlog_queue[nid] = [[None, sv.backlog]] if sv.backlog else []
    sim.trace.states[0] = sim._state_snapshot()
    sim.update_edge_weights(tick)
    events = sim.step(tick, flows, controls)
    return sim.trace.states[-1], events
