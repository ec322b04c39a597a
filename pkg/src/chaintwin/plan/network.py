"""Time-expanded planning network.

The material graph is copied once per tick; per-tick flow balance then
becomes ordinary arc conservation:

  pool(i,t)   unit pool at node i during tick t (inventory + arrivals
              + supply); excess = initial inventory (t=0) and scheduled
              supply (every tick, suppressed during node outages)
  movement    pool(i,t) -> pool(j,t+d) per material edge, capacity after
              deterministic disturbances, cost = unit transport cost;
              arrivals past the horizon route straight to the sink (the
              simulator leaves them in transit, uncharged)
  holding     pool(i,t) -> pool(i,t+1), free capacity, holding rate while
              the destination state is still charged (t+1 <= T-1)
  dem(c,t)    demand deficit; served same-tick via a free service arc, or
              late through the backward backlog chain dem(c,t+1)->dem(c,t)
              at the backlog rate per tick of lateness; a slack source
              feeds dem(c,T-1) so unserved demand is priced, never rejected
  production  optional decision arcs prod -> pool(i,t) bounded by the
              scenario's per-node production limit, priced at action rate

Deterministic construction order gives every arc a stable integer id.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import EmptyMaterialLayer, InvalidAttribute
from ..graph.snapshot import GraphSnapshot
from ..graph.types import EntityKind, LayerKind
from ..sim.cost import CostModel
from ..sim.scenario import Scenario

INF_CAP = 1 << 40


@dataclass
class Arc:
    index: int
    src: int
    dst: int
    capacity: int
    cost: float
    kind: str                      # movement | holding | service | backlog | slack | production | drain
    meta: tuple = ()

    def to_dict(self) -> dict:
        return {"index": self.index, "src": self.src, "dst": self.dst,
                "capacity": self.capacity, "cost": self.cost,
                "kind": self.kind, "meta": list(self.meta)}


@dataclass
class TimeExpandedNetwork:
    horizon: int
    node_labels: list[tuple] = field(default_factory=list)
    node_index: dict[tuple, int] = field(default_factory=dict)
    arcs: list[Arc] = field(default_factory=list)
    excess: dict[int, int] = field(default_factory=dict)  # +supply / -demand

    def add_network_node(self, label: tuple) -> int:
        idx = self.node_index.get(label)
        if idx is None:
            idx = len(self.node_labels)
            self.node_index[label] = idx
            self.node_labels.append(label)
        return idx

    def add_arc(self, src: int, dst: int, capacity: int, cost: float,
                kind: str, meta: tuple = ()) -> Arc:
        arc = Arc(index=len(self.arcs), src=src, dst=dst,
                  capacity=int(capacity), cost=float(cost), kind=kind, meta=meta)
        self.arcs.append(arc)
        return arc

    def add_excess(self, idx: int, amount: int) -> None:
        if amount:
            self.excess[idx] = self.excess.get(idx, 0) + amount

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for a in self.arcs:
            out[a.kind] = out.get(a.kind, 0) + 1
        return out


def _node_outaged(scenario: Scenario, node_id: str, tick: int) -> bool:
    return any(d.kind == "node_outage" and d.target == node_id and d.active_at(tick)
               for d in scenario.disturbances)


def _edge_capacity_at(scenario: Scenario, edge, tick: int) -> int:
    if not edge.live_at(tick):
        return 0
    cap = int(edge.weights.capacity)
    for d in scenario.disturbances:
        if d.target != edge.id or not d.active_at(tick):
            continue
        if d.kind == "capacity_scale":
            cap = int(cap * d.magnitude)
        elif d.kind == "edge_outage":
            cap = 0
    if _node_outaged(scenario, edge.src, tick) or _node_outaged(scenario, edge.dst, tick):
        cap = 0
    return max(0, cap)


def build_time_expanded(snapshot: GraphSnapshot, scenario: Scenario,
                        horizon: int, cost_model: CostModel
                        ) -> TimeExpandedNetwork:
    if horizon < 1:
        raise InvalidAttribute("planning horizon must be >= 1")
    material_edges = snapshot.layer_edges(LayerKind.MATERIAL)
    if not material_edges:
        raise EmptyMaterialLayer("no material-layer edges to plan over")
    for nid, node in snapshot.nodes.items():
        if node.state.backlog:
            raise InvalidAttribute(
                f"planning requires zero initial backlog (node {nid!r})")

    net = TimeExpandedNetwork(horizon=horizon)
    T = horizon
    node_ids = snapshot.node_ids()
    for nid in node_ids:
        for t in range(T + 1):
            net.add_network_node(("pool", nid, t))
    sink = net.add_network_node(("sink",))
    slack = net.add_network_node(("slack",))
    prod = net.add_network_node(("prod",))

    # movement arcs
    for edge in material_edges:
        d = max(1, round(edge.weights.transit_time))
        for t in range(T):
            cap = _edge_capacity_at(scenario, edge, t)
            src = net.node_index[("pool", edge.src, t)]
            if t + d <= T:
                dst = net.node_index[("pool", edge.dst, t + d)]
            else:
                dst = sink  # arrives after the horizon: stays in transit
            net.add_arc(src, dst, cap, edge.weights.cost_per_unit,
                        "movement", (edge.id, t))

    # holding arcs: destination state is charged while t+1 <= T-1
    for nid in node_ids:
        h = cost_model.holding(nid)
        for t in range(T):
            cost = h if (t + 1) <= T - 1 else 0.0
            net.add_arc(net.node_index[("pool", nid, t)],
                        net.node_index[("pool", nid, t + 1)],
                        INF_CAP, cost, "holding", (nid, t))

    # demand chains
    customers = [nid for nid in node_ids
                 if nid in scenario.demand_profile
                 and any(q > 0 for q in scenario.demand_profile[nid].values())]
    for cid in customers:
        b = cost_model.backlog(cid)
        for t in range(T):
            net.add_network_node(("dem", cid, t))
        for t in range(T):
            dem_idx = net.node_index[("dem", cid, t)]
            service_cap = 0 if _node_outaged(scenario, cid, t) else INF_CAP
            net.add_arc(net.node_index[("pool", cid, t)], dem_idx,
                        service_cap, 0.0, "service", (cid, t))
            net.add_excess(dem_idx, -scenario.demand_at(cid, t))
        for t in range(T - 1):
            net.add_arc(net.node_index[("dem", cid, t + 1)],
                        net.node_index[("dem", cid, t)],
                        INF_CAP, b, "backlog", (cid, t + 1))
        net.add_arc(slack, net.node_index[("dem", cid, T - 1)],
                    INF_CAP, 0.0, "slack", (cid,))

    # production decision arcs
    prod_budget = 0
    for nid in node_ids:
        limit = scenario.production_limits.get(nid, 0)
        if limit <= 0:
            continue
        node_cap = int(snapshot.nodes[nid].attrs.get("capacity", limit))
        per_tick = min(limit, node_cap)
        a = cost_model.action(nid)
        for t in range(T):
            cap = 0 if _node_outaged(scenario, nid, t) else per_tick
            net.add_arc(prod, net.node_index[("pool", nid, t)],
                        cap, a, "production", (nid, t))
            prod_budget += cap

    # excesses: initial inventory and scheduled supply (outages suppress)
    total_supply = 0
    for nid in node_ids:
        inv = scenario.initial_inventory.get(nid, snapshot.nodes[nid].state.inventory)
        net.add_excess(net.node_index[("pool", nid, 0)], int(inv))
        total_supply += int(inv)
        for t in range(T):
            s = scenario.supply_at(nid, t)
            if s > 0 and not _node_outaged(scenario, nid, t):
                net.add_excess(net.node_index[("pool", nid, t)], s)
                total_supply += s

    total_demand = scenario.total_demand(T)
    net.add_excess(slack, total_demand)
    net.add_excess(prod, prod_budget)

    # drains: horizon pools, spare slack and spare production budget
    for nid in node_ids:
        net.add_arc(net.node_index[("pool", nid, T)], sink, INF_CAP, 0.0,
                    "drain", (nid,))
    net.add_arc(slack, sink, INF_CAP, 0.0, "drain", ("slack",))
    net.add_arc(prod, sink, INF_CAP, 0.0, "drain", ("prod",))
    net.add_excess(sink, -(total_supply + total_demand + prod_budget - total_demand))

    assert sum(net.excess.values()) == 0
    return net
