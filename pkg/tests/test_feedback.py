"""Feedback loop: reconciliation, smoothing, falsification, convergence."""

import math

import pytest

from chaintwin.errors import DuplicateOpenPrediction
from chaintwin.feedback import FeedbackLoop
from chaintwin.graph import EntityKind, GraphTimeline
from chaintwin.ingest import AlertEngine, CleanRecord
from helpers import edge, node


def observed(subject, measure, value, tick, eid="o1"):
    return CleanRecord(subject=subject, measure=measure, value=float(value),
                       observed_tick=tick, provenance=("iot", eid))


def timeline_with_edge(transit=4.0):
    tl = GraphTimeline()
    tl.add_node(0, node("A", EntityKind.SUPPLIER))
    tl.add_node(0, node("B", EntityKind.WAREHOUSE))
    tl.add_edge(0, edge("E1", "A", "B", transit=transit))
    return tl


def test_record_prediction_and_duplicate():
    fb = FeedbackLoop(timeline_with_edge())
    fb.record_prediction(0, "E1", "transit_time", 4, target_tick=7)
    with pytest.raises(DuplicateOpenPrediction):
        fb.record_prediction(1, "E1", "transit_time", 5, target_tick=7)
    # a different target tick is a different prediction
    fb.record_prediction(1, "E1", "transit_time", 5, target_tick=8)
    assert fb.record_counts()["open"] == 2


def test_reconcile_zero_residual_not_flagged():
    fb = FeedbackLoop(timeline_with_edge())
    fb.record_prediction(0, "E1", "transit_time", 4, target_tick=3)
    discs = fb.reconcile([observed("E1", "transit_time", 4, 3)])
    assert len(discs) == 1
    assert discs[0].residual == 0.0 and not discs[0].flagged
    assert fb.record_counts()["closed"] == 1


def test_reconcile_flags_beyond_tolerance():
    fb = FeedbackLoop(timeline_with_edge())
    fb.record_prediction(0, "E1", "transit_time", 4, target_tick=3)
    discs = fb.reconcile([observed("E1", "transit_time", 8, 3)])
    assert discs[0].residual == 4.0 and discs[0].flagged


def test_reconcile_no_open_predictions():
    fb = FeedbackLoop(timeline_with_edge())
    assert fb.reconcile([observed("E1", "transit_time", 8, 3)]) == []


def test_inventory_relative_tolerance():
    tl = timeline_with_edge()
    fb = FeedbackLoop(tl)
    fb.record_prediction(0, "A", "inventory", 100, target_tick=1)
    fb.record_prediction(0, "A", "inventory", 100, target_tick=2)
    d1 = fb.reconcile([observed("A", "inventory", 104, 1)])  # 4% -> ok
    d2 = fb.reconcile([observed("A", "inventory", 110, 2)])  # 10% -> flagged
    assert not d1[0].flagged and d2[0].flagged


def test_recalibrate_smoothing_formula():
    tl = timeline_with_edge(transit=4.0)
    fb = FeedbackLoop(tl, alpha=0.5)
    fb.record_prediction(0, "E1", "transit_time", 4, target_tick=3)
    discs = fb.reconcile([observed("E1", "transit_time", 8, 3)])
    deltas = fb.recalibrate(discs, commit_tick=3)
    assert len(deltas) == 1
    assert tl.current_edge("E1").weights.transit_time == 6.0  # 4 + 0.5*(8-4)


def test_recalibrate_zero_residual_suppresses_delta():
    tl = timeline_with_edge(transit=4.0)
    fb = FeedbackLoop(tl)
    fb.record_prediction(0, "E1", "transit_time", 4, target_tick=3)
    discs = fb.reconcile([observed("E1", "transit_time", 4, 3)])
    n = len(tl.deltas)
    assert fb.recalibrate(discs) == []
    assert len(tl.deltas) == n


def test_recalibrate_clamps_to_invariants():
    tl = timeline_with_edge(transit=1.0)
    fb = FeedbackLoop(tl, alpha=1.0)
    fb.record_prediction(0, "E1", "transit_time", 1.0, target_tick=2)
    # bad sensor reads transit 0.2; smoothing must clamp at >= 1
    discs = fb.reconcile([observed("E1", "transit_time", 0.2, 2)])
    fb.recalibrate(discs, commit_tick=2)
    assert tl.current_edge("E1").weights.transit_time == 1.0
    cal = fb.calibrations["E1:transit_time"]
    assert cal.clamps == 1


def test_falsify_thresholds():
    tl = timeline_with_edge()
    fb = FeedbackLoop(tl, min_samples=5, falsify_threshold=0.6)
    cal = fb._calibration_for("E1", "transit_time")
    cal.flags.extend([True] * 5)
    report = fb.falsify()
    assert "E1:transit_time" in report["falsified"]

    fb2 = FeedbackLoop(tl, min_samples=5)
    cal2 = fb2._calibration_for("E1", "transit_time")
    cal2.flags.extend([False] * 5)
    assert fb2.falsify()["falsified"] == []

    fb3 = FeedbackLoop(tl, min_samples=5, falsify_threshold=0.6)
    cal3 = fb3._calibration_for("E1", "transit_time")
    cal3.flags.extend([True, True, True, False, False])  # 3/5 at boundary
    assert "E1:transit_time" in fb3.falsify()["falsified"]  # >= comparison


def test_falsify_insufficient_samples_reported():
    fb = FeedbackLoop(timeline_with_edge(), min_samples=5)
    cal = fb._calibration_for("E1", "transit_time")
    cal.flags.extend([True, True])
    report = fb.falsify()
    assert report["falsified"] == []
    assert "E1:transit_time" in report["insufficient_samples"]


def test_falsified_parameter_frozen_until_acknowledged():
    tl = timeline_with_edge(transit=4.0)
    fb = FeedbackLoop(tl, min_samples=3, falsify_threshold=0.6)
    cal = fb._calibration_for("E1", "transit_time")
    cal.flags.extend([True, True, True])
    fb.falsify()
    fb.record_prediction(0, "E1", "transit_time", 4, target_tick=1)
    discs = fb.reconcile([observed("E1", "transit_time", 8, 1)])
    assert fb.recalibrate(discs, commit_tick=1) == []  # frozen
    assert tl.current_edge("E1").weights.transit_time == 4.0
    assert fb.acknowledge("E1:transit_time")
    fb.record_prediction(0, "E1", "transit_time", 4, target_tick=2)
    discs = fb.reconcile([observed("E1", "transit_time", 8, 2)])
    assert len(fb.recalibrate(discs, commit_tick=2)) == 1  # thawed


def test_prediction_conservation_counts():
    tl = timeline_with_edge()
    fb = FeedbackLoop(tl)
    for t in range(6):
        fb.record_prediction(0, "E1", "transit_time", 4, target_tick=t)
    fb.reconcile([observed("E1", "transit_time", 5, t, eid=f"o{t}")
                  for t in range(3)])
    fb.expire_stale(current_tick=100, lateness_window=10)
    counts = fb.record_counts()
    assert counts["closed"] == 3
    assert counts["expired"] == 3
    assert counts["open"] == 0
    assert counts["total"] == counts["closed"] + counts["expired"] + counts["open"]


def test_expiry_raises_info_alert():
    tl = timeline_with_edge()
    fb = FeedbackLoop(tl)
    engine = AlertEngine()
    fb.record_prediction(0, "E1", "transit_time", 4, target_tick=1)
    fb.expire_stale(current_tick=50, lateness_window=10, alert_engine=engine)
    alerts = engine.all()
    assert alerts and alerts[0].rule == "prediction_expired"
    assert alerts[0].severity == "info"


def test_closed_loop_convergence_bound():
    # true transit 8, belief 4, alpha 0.3, tolerance 0.1:
    # error 4*0.7^k monotone, below 0.1 within ceil(log(0.1/4)/log(0.7)) = 11
    tl = timeline_with_edge(transit=4.0)
    fb = FeedbackLoop(tl, alpha=0.3)
    true_transit = 8.0
    errors = []
    cycles_needed = math.ceil(math.log(0.1 / 4.0) / math.log(0.7))
    assert cycles_needed == 11
    for k in range(cycles_needed):
        belief = tl.current_edge("E1").weights.transit_time
        errors.append(abs(belief - true_transit))
        fb.record_prediction(k, "E1", "transit_time", belief, target_tick=k)
        discs = fb.reconcile([observed("E1", "transit_time", true_transit, k,
                                       eid=f"c{k}")])
        fb.recalibrate(discs, commit_tick=k)
    final_error = abs(tl.current_edge("E1").weights.transit_time - true_transit)
    errors.append(final_error)
    assert all(e2 <= e1 for e1, e2 in zip(errors, errors[1:]))  # monotone
    assert final_error < 0.1
    assert errors[-2] >= 0.1  # not converged before the bound


def test_reliability_update_from_outcomes():
    tl = timeline_with_edge(transit=4.0)
    fb = FeedbackLoop(tl, alpha=0.5)
    cal = fb._calibration_for("E1", "transit_time")
    cal.flags.extend([False, False, True, False])  # 3/4 on time
    fb.update_reliability_from_outcomes("E1", commit_tick=5)
    rel = tl.current_edge("E1").weights.reliability
    assert rel == 1.0 + 0.5 * (0.75 - 1.0)


def test_audit_log_written(tmp_path):
    path = tmp_path / "audit.log"
    tl = timeline_with_edge()
    fb = FeedbackLoop(tl, audit_log_path=path)
    fb.record_prediction(0, "E1", "transit_time", 4, target_tick=1)
    discs = fb.reconcile([observed("E1", "transit_time", 8, 1)])
    fb.recalibrate(discs, commit_tick=1)
    lines = path.read_text().splitlines()
    kinds = [__import__("json").loads(l)["kind"] for l in lines]
    assert kinds == ["prediction", "discrepancy", "recalibrate"]
