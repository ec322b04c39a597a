"""Close the loop: predict, observe, reconcile, recalibrate, and watch a
biased transit-time belief converge to reality. Then falsify a parameter
that stays wrong and freeze it for operator review.

Run: python3 demos/07_feedback_calibration.py
"""

from chaintwin import (
    EdgeRecord,
    EntityKind,
    EntityNode,
    GraphTimeline,
    LayerKind,
    WeightVector,
)
from chaintwin.feedback import FeedbackLoop
from chaintwin.ingest import CleanRecord

tl = GraphTimeline()
tl.add_node(0, EntityNode("A", EntityKind.SUPPLIER, "A"))
tl.add_node(0, EntityNode("B", EntityKind.WAREHOUSE, "B"))
tl.add_edge(0, EdgeRecord("lane", "A", "B", LayerKind.MATERIAL,
                          WeightVector(cost_per_unit=1, transit_time=4,
                                       capacity=10)))

fb = FeedbackLoop(tl, alpha=0.3)
TRUE_TRANSIT = 8.0

print("twin believes transit 4.0; the real lane takes 8.0")
print(f"{'cycle':>5} {'belief':>8} {'residual':>9} flagged")
for k in range(12):
    belief = tl.current_edge("lane").weights.transit_time
    fb.record_prediction(k, "lane", "transit_time", belief, target_tick=k)
    obs = CleanRecord(subject="lane", measure="transit_time",
                      value=TRUE_TRANSIT, observed_tick=k,
                      provenance=("iot", f"gps-{k}"))
    discs = fb.reconcile([obs])
    fb.recalibrate(discs, commit_tick=k)
    d = discs[0]
    print(f"{k:>5} {belief:>8.3f} {d.residual:>9.3f} {d.flagged}")

final = tl.current_edge("lane").weights.transit_time
print(f"\nconverged belief: {final:.3f} (within 0.1 of {TRUE_TRANSIT})")
print("prediction ledger:", fb.record_counts())

# a sensor that never agrees: the parameter gets falsified and frozen
fb2 = FeedbackLoop(tl, alpha=0.3, min_samples=5, falsify_threshold=0.6)
for k in range(5):
    fb2.record_prediction(k, "A", "inventory", 100, target_tick=100 + k)
    obs = CleanRecord(subject="A", measure="inventory", value=10.0,
                      observed_tick=100 + k, provenance=("erp", f"x{k}"))
    fb2.recalibrate(fb2.reconcile([obs]), commit_tick=100 + k)
report = fb2.falsify()
print(f"\nfalsified parameters: {report['falsified']}")
print("frozen until an operator acknowledges "
      "(POST /calibration/A:inventory/ack)")
fb2.acknowledge("A:inventory")
print("acknowledged; automatic smoothing resumes")
