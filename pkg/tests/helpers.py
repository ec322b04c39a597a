"""Shared builders for test networks and random instances."""

from __future__ import annotations

import random

from chaintwin.graph import (
    EdgeRecord,
    EntityKind,
    EntityNode,
    GraphTimeline,
    LayerKind,
    StateVector,
    WeightVector,
)
from chaintwin.sim import Disturbance, Scenario


def node(nid, kind=EntityKind.WAREHOUSE, inventory=0, **attrs):
    if kind == EntityKind.CUSTOMER:
        attrs.setdefault("demand_rate", 1.0)
    if kind == EntityKind.MANUFACTURER:
        attrs.setdefault("capacity", 10.0)
    return EntityNode(id=nid, kind=kind, label=nid,
                      state=StateVector(inventory=inventory), attrs=attrs)


def edge(eid, src, dst, cost=1.0, transit=1, capacity=10,
         layer=LayerKind.MATERIAL, carbon=0.0, valid_from=0, valid_until=None):
    return EdgeRecord(
        id=eid, src=src, dst=dst, layer=layer,
        weights=WeightVector(cost_per_unit=cost, transit_time=transit,
                             capacity=capacity, carbon_per_unit=carbon),
        valid_from=valid_from, valid_until=valid_until)


def chain_timeline(initial=(0, 2, 2), supply=2, demand=2, horizon=8,
                   cost=(1.0, 1.0), capacity=(10, 10)):
    """S -> M -> C chain used by the hand-stepped oracles."""
    tl = GraphTimeline()
    tl.add_node(0, node("S", EntityKind.SUPPLIER, inventory=initial[0]))
    tl.add_node(0, node("M", EntityKind.WAREHOUSE, inventory=initial[1]))
    tl.add_node(0, node("C", EntityKind.CUSTOMER, inventory=initial[2]))
    tl.add_edge(0, edge("E1", "S", "M", cost=cost[0], capacity=capacity[0]))
    tl.add_edge(0, edge("E2", "M", "C", cost=cost[1], capacity=capacity[1]))
    scenario = Scenario(
        name="chain",
        supply_schedule={"S": {t: supply for t in range(horizon)}},
        demand_profile={"C": {t: demand for t in range(horizon)}},
    )
    return tl, scenario


def random_network(rng: random.Random, max_nodes: int = 20,
                   max_edges: int | None = None):
    """Layered random material network: suppliers -> mids -> customers."""
    tl = GraphTimeline()
    n_sup = rng.randint(1, 3)
    n_mid = rng.randint(1, max(1, max_nodes // 3))
    n_cust = rng.randint(1, 3)
    suppliers = [f"S{i}" for i in range(n_sup)]
    mids = [f"W{i}" for i in range(n_mid)]
    customers = [f"C{i}" for i in range(n_cust)]
    for nid in suppliers:
        tl.add_node(0, node(nid, EntityKind.SUPPLIER, inventory=rng.randint(0, 10)))
    for nid in mids:
        tl.add_node(0, node(nid, EntityKind.WAREHOUSE, inventory=rng.randint(0, 10)))
    for nid in customers:
        tl.add_node(0, node(nid, EntityKind.CUSTOMER, inventory=rng.randint(0, 5)))
    eid = 0
    edges = []
    for s in suppliers:
        for w in mids:
            if rng.random() < 0.7:
                e = edge(f"E{eid:03d}", s, w, cost=rng.randint(1, 9),
                         transit=rng.randint(1, 3), capacity=rng.randint(1, 12))
                tl.add_edge(0, e)
                edges.append(e)
                eid += 1
    for w in mids:
        for c in customers:
            if rng.random() < 0.7:
                e = edge(f"E{eid:03d}", w, c, cost=rng.randint(1, 9),
                         transit=rng.randint(1, 3), capacity=rng.randint(1, 12))
                tl.add_edge(0, e)
                edges.append(e)
                eid += 1
    if not edges:  # guarantee at least one path
        e1 = edge(f"E{eid:03d}", suppliers[0], mids[0], capacity=8)
        tl.add_edge(0, e1)
        e2 = edge(f"E{eid + 1:03d}", mids[0], customers[0], capacity=8)
        tl.add_edge(0, e2)
        edges.extend([e1, e2])
    return tl, suppliers, mids, customers, edges


def tree_network(rng: random.Random):
    """Random forest: every node has at most one inbound route, so each
    customer's supply path is unique (outages can only hurt)."""
    tl = GraphTimeline()
    n_sup = rng.randint(1, 2)
    n_mid = rng.randint(1, 4)
    n_cust = rng.randint(1, 3)
    suppliers = [f"S{i}" for i in range(n_sup)]
    mids = [f"W{i}" for i in range(n_mid)]
    customers = [f"C{i}" for i in range(n_cust)]
    for nid in suppliers:
        tl.add_node(0, node(nid, EntityKind.SUPPLIER, inventory=rng.randint(0, 8)))
    for nid in mids:
        tl.add_node(0, node(nid, EntityKind.WAREHOUSE, inventory=rng.randint(0, 6)))
    for nid in customers:
        tl.add_node(0, node(nid, EntityKind.CUSTOMER, inventory=rng.randint(0, 4)))
    edges = []
    for i, w in enumerate(mids):
        e = edge(f"E{len(edges):03d}", rng.choice(suppliers), w,
                 cost=rng.randint(1, 9), transit=rng.randint(1, 2),
                 capacity=rng.randint(2, 10))
        tl.add_edge(0, e)
        edges.append(e)
    for c in customers:
        e = edge(f"E{len(edges):03d}", rng.choice(mids), c,
                 cost=rng.randint(1, 9), transit=rng.randint(1, 2),
                 capacity=rng.randint(2, 10))
        tl.add_edge(0, e)
        edges.append(e)
    return tl, suppliers, mids, customers, edges


def random_scenario(rng: random.Random, suppliers, customers, edges,
                    horizon: int, with_noise: bool = False) -> Scenario:
    supply = {s: {t: rng.randint(0, 4) for t in range(horizon) if rng.random() < 0.6}
              for s in suppliers}
    demand = {c: {t: rng.randint(0, 3) for t in range(horizon) if rng.random() < 0.5}
              for c in customers}
    disturbances = []
    for e in edges:
        if rng.random() < 0.15:
            start = rng.randint(0, max(0, horizon - 2))
            disturbances.append(Disturbance(
                target=e.id, kind="edge_outage", start=start,
                end=min(horizon, start + rng.randint(1, 4))))
        elif rng.random() < 0.15:
            start = rng.randint(0, max(0, horizon - 2))
            disturbances.append(Disturbance(
                target=e.id, kind="capacity_scale", start=start,
                end=min(horizon, start + rng.randint(1, 4)),
                magnitude=rng.choice([0.0, 0.25, 0.5, 0.75])))
    if rng.random() < 0.2 and suppliers:
        target = rng.choice(suppliers)
        start = rng.randint(0, max(0, horizon - 2))
        disturbances.append(Disturbance(
            target=target, kind="node_outage", start=start,
            end=min(horizon, start + rng.randint(1, 3))))
    if with_noise:
        for s in suppliers:
            if rng.random() < 0.5:
                disturbances.append(Disturbance(
                    target=s, kind="node_noise", start=0, end=horizon,
                    magnitude=rng.randint(1, 3)))
    return Scenario(name="random", disturbances=disturbances,
                    supply_schedule=supply, demand_profile=demand)
