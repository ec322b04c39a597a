"""Build a small multi-layer supply network and query it over time.

The timeline is an append-only log of deltas; snapshots are materialized
point-in-time views. Run: python3 demos/01_build_graph.py
"""

from chaintwin import (
    EdgeRecord,
    EntityKind,
    EntityNode,
    GraphTimeline,
    LayerKind,
    StateVector,
    WeightVector,
)

tl = GraphTimeline()

tl.add_node(0, EntityNode("S1", EntityKind.SUPPLIER, "Copper supplier",
                          StateVector(inventory=40)))
tl.add_node(0, EntityNode("M1", EntityKind.MANUFACTURER, "Board plant",
                          StateVector(inventory=5), attrs={"capacity": 20}))
tl.add_node(0, EntityNode("W1", EntityKind.WAREHOUSE, "Regional DC",
                          StateVector(inventory=12)))
tl.add_node(0, EntityNode("C1", EntityKind.CUSTOMER, "Retailer",
                          attrs={"demand_rate": 4}))

tl.add_edge(0, EdgeRecord("road-1", "S1", "M1", LayerKind.MATERIAL,
                          WeightVector(cost_per_unit=2.0, transit_time=2,
                                       capacity=15, carbon_per_unit=0.4)))
tl.add_edge(0, EdgeRecord("rail-1", "S1", "M1", LayerKind.MATERIAL,
                          WeightVector(cost_per_unit=1.2, transit_time=3,
                                       capacity=30, carbon_per_unit=0.1)))
tl.add_edge(0, EdgeRecord("road-2", "M1", "W1", LayerKind.MATERIAL,
                          WeightVector(cost_per_unit=1.5, transit_time=1,
                                       capacity=25, carbon_per_unit=0.3)))
tl.add_edge(0, EdgeRecord("road-3", "W1", "C1", LayerKind.MATERIAL,
                          WeightVector(cost_per_unit=1.0, transit_time=1,
                                       capacity=25, carbon_per_unit=0.2)))
tl.add_edge(0, EdgeRecord("edi-1", "C1", "M1", LayerKind.INFORMATION,
                          WeightVector(cost_per_unit=0.0, transit_time=0)))
tl.add_edge(0, EdgeRecord("inv-1", "M1", "S1", LayerKind.FINANCIAL,
                          WeightVector(cost_per_unit=-0.5, transit_time=0)))

# a temporary spot-market lane, valid ticks 5..9 only
tl.add_edge(0, EdgeRecord("spot-1", "S1", "W1", LayerKind.MATERIAL,
                          WeightVector(cost_per_unit=4.0, transit_time=1,
                                       capacity=10),
                          valid_from=5, valid_until=10))

snap0 = tl.snapshot_at(0)
print(f"tick 0: {len(snap0.nodes)} nodes, {len(snap0.edges)} edges")
print("material edges:", [e.id for e in snap0.layer_edges(LayerKind.MATERIAL)])

print("\nS1 outgoing material lanes (parallel edges are distinct):")
for edge, neighbor in snap0.neighbors("S1", LayerKind.MATERIAL, "out"):
    w = edge.weights
    print(f"  {edge.id}: -> {neighbor}  cost {w.cost_per_unit}/unit, "
          f"{w.transit_time:g} ticks, cap {w.capacity}/tick")

snap7 = tl.snapshot_at(7)
print(f"\ntick 7: spot lane visible? {'spot-1' in snap7.edges}")
print(f"tick 12: spot lane visible? {'spot-1' in tl.snapshot_at(12).edges}")

# the state evolves through deltas; late-arriving writes respect tick order
tl.set_node_attr(3, "W1", "state.inventory", 9)
tl.set_node_attr(2, "W1", "state.inventory", 11)  # late write, earlier tick
print("\nW1 inventory by tick:",
      {t: tl.snapshot_at(t).nodes["W1"].state.inventory for t in (1, 2, 3)})

print("\nsnapshot hash (stable):", tl.snapshot_at(3).content_hash()[:16])
