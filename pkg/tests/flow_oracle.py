"""Exhaustive-search oracle for optimal plans on tiny instances.

Memoized search over every feasible integer decision (per-edge flows and
per-node production, tick by tick), mirroring the simulation's phase order
exactly: arrivals, supply, production, departures, demand auto-serve.
Independent of the min-cost-flow path being checked.
"""

from __future__ import annotations

import functools
import random

from chaintwin.graph import EntityKind, GraphSnapshot, LayerKind
from chaintwin.sim import CostModel, Scenario

from helpers import edge as make_edge, node as make_node
from chaintwin.graph import GraphTimeline


def _node_outaged(scenario, node_id, tick):
    return any(d.kind == "node_outage" and d.target == node_id and d.active_at(tick)
               for d in scenario.disturbances)


def _edge_cap(scenario, e, tick):
    if not e.live_at(tick):
        return 0
    cap = int(e.weights.capacity)
    for d in scenario.disturbances:
        if d.target != e.id or not d.active_at(tick):
            continue
        if d.kind == "capacity_scale":
            cap = int(cap * d.magnitude)
        elif d.kind == "edge_outage":
            cap = 0
    if _node_outaged(scenario, e.src, tick) or _node_outaged(scenario, e.dst, tick):
        cap = 0
    return max(0, cap)


def exhaustive_optimum(snapshot: GraphSnapshot, scenario: Scenario,
                       horizon: int, cost_model: CostModel) -> float:
    nodes = snapshot.node_ids()
    nidx = {n: i for i, n in enumerate(nodes)}
    customers = sorted(c for c in scenario.demand_profile
                       if any(q > 0 for q in scenario.demand_profile[c].values()))
    cidx = {c: i for i, c in enumerate(customers)}
    edges = [snapshot.edges[eid] for eid in sorted(snapshot.edges)
             if snapshot.edges[eid].layer == LayerKind.MATERIAL]
    producers = sorted(n for n, lim in scenario.production_limits.items() if lim > 0)

    h = [cost_model.holding(n) for n in nodes]
    b = [cost_model.backlog(c) for c in customers]

    init_inv = tuple(
        int(scenario.initial_inventory.get(n, snapshot.nodes[n].state.inventory))
        for n in nodes)
    init_backlog = tuple(0 for _ in customers)

    @functools.lru_cache(maxsize=None)
    def best(t: int, inv: tuple, backlog: tuple, pipeline: tuple) -> float:
        if t == horizon:
            return 0.0
        state_cost = (sum(h[i] * inv[i] for i in range(len(nodes)))
                      + sum(b[i] * backlog[i] for i in range(len(customers))))
        # arrivals + supply
        work = list(inv)
        rest_pipeline = []
        for (arr, dst), qty in pipeline:
            if arr == t:
                work[nidx[dst]] += qty
            else:
                rest_pipeline.append(((arr, dst), qty))
        for n in nodes:
            s = scenario.supply_at(n, t)
            if s > 0 and not _node_outaged(scenario, n, t):
                work[nidx[n]] += s

        best_cost = float("inf")

        def produce(pi: int, action_cost: float):
            nonlocal best_cost
            if pi == len(producers):
                depart(0, list(work), [], action_cost, 0.0)
                return
            n = producers[pi]
            limit = min(scenario.production_limits[n],
                        int(snapshot.nodes[n].attrs.get(
                            "capacity", scenario.production_limits[n])))
            if _node_outaged(scenario, n, t):
                limit = 0
            for q in range(limit + 1):
                work[nidx[n]] += q
                produce(pi + 1, action_cost + cost_model.action(n) * q)
                work[nidx[n]] -= q

        def depart(ei: int, avail: list, sent: list, action_cost: float,
                   transport: float):
            nonlocal best_cost
            if ei == len(edges):
                settle(avail, sent, action_cost + transport)
                return
            e = edges[ei]
            cap = min(_edge_cap(scenario, e, t), avail[nidx[e.src]])
            for q in range(cap + 1):
                if q:
                    avail[nidx[e.src]] -= q
                    sent.append((e, q))
                depart(ei + 1, avail, sent, action_cost,
                       transport + q * e.weights.cost_per_unit)
                if q:
                    avail[nidx[e.src]] += q
                    sent.pop()

        def settle(avail: list, sent: list, decision_cost: float):
            nonlocal best_cost
            nxt = list(avail)
            new_pipe = list(rest_pipeline)
            for e, q in sent:
                d = max(1, round(e.weights.transit_time))
                arr = t + d
                if arr <= horizon - 1:
                    new_pipe.append(((arr, e.dst), q))
                # else: in transit past the horizon, cost already paid
            new_backlog = list(backlog)
            for c in customers:
                req = scenario.demand_at(c, t)
                outstanding = new_backlog[cidx[c]] + req
                if not _node_outaged(scenario, c, t):
                    served = min(nxt[nidx[c]], outstanding)
                    nxt[nidx[c]] -= served
                    outstanding -= served
                new_backlog[cidx[c]] = outstanding
            merged: dict = {}
            for key, qty in new_pipe:
                merged[key] = merged.get(key, 0) + qty
            tail = best(t + 1, tuple(nxt), tuple(new_backlog),
                        tuple(sorted(merged.items())))
            total = decision_cost + tail
            if total < best_cost:
                best_cost = total

        produce(0, 0.0)
        return state_cost + best_cost

    return best(0, init_inv, init_backlog, ())


def random_small_instance(rng: random.Random):
    """One planner-oracle instance: <=4 nodes, <=4 edges, T<=3, caps<=4."""
    n_nodes = rng.randint(2, 4)
    horizon = rng.randint(1, 3)
    tl = GraphTimeline()
    names = []
    for i in range(n_nodes):
        if i == 0:
            nid = "S0"
            tl.add_node(0, make_node(nid, EntityKind.SUPPLIER,
                                     inventory=rng.randint(0, 4)))
        elif i == n_nodes - 1:
            nid = "C0"
            tl.add_node(0, make_node(nid, EntityKind.CUSTOMER,
                                     inventory=rng.randint(0, 2)))
        else:
            nid = f"W{i}"
            tl.add_node(0, make_node(nid, EntityKind.WAREHOUSE,
                                     inventory=rng.randint(0, 3)))
        names.append(nid)
    n_edges = rng.randint(1, 4)
    placed = 0
    attempt = 0
    while placed < n_edges and attempt < 20:
        attempt += 1
        src, dst = rng.sample(names, 2)
        eid = f"E{placed}"
        try:
            tl.add_edge(0, make_edge(eid, src, dst,
                                     cost=rng.randint(0, 5),
                                     transit=rng.randint(1, 2),
                                     capacity=rng.randint(1, 4)))
            placed += 1
        except Exception:
            continue
    if placed == 0:
        tl.add_edge(0, make_edge("E0", names[0], names[-1],
                                 cost=1, transit=1, capacity=3))

    supply = {"S0": {t: rng.randint(0, 2) for t in range(horizon)
                     if rng.random() < 0.7}}
    demand = {"C0": {t: rng.randint(1, 2) for t in range(horizon)
                     if rng.random() < 0.8}}
    if not any(demand["C0"].values()):
        demand["C0"] = {0: 1}
    production = {}
    if rng.random() < 0.3:
        production["S0"] = rng.randint(1, 2)
    scenario = Scenario(name="tiny", supply_schedule=supply,
                        demand_profile=demand, production_limits=production)
    if rng.random() < 0.25:
        from chaintwin.sim import Disturbance
        eids = sorted(tl.snapshot_at(0).edges)
        scenario.disturbances.append(Disturbance(
            target=rng.choice(eids), kind="edge_outage",
            start=rng.randint(0, max(0, horizon - 1)), end=horizon))
    cost_model = CostModel(
        default_holding_rate=float(rng.randint(0, 2)),
        default_backlog_rate=float(rng.randint(1, 6)),
        default_action_rate=float(rng.randint(0, 2)),
    )
    return tl.snapshot_at(0), scenario, horizon, cost_model
