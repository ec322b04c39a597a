"""Prediction bookkeeping, reconciliation, and parameter recalibration.

The twin records what it expects (edge transit times, node inventories,
costs) before outcomes land. Reconciliation closes each open prediction
against the matching observation, computes the residual, and flags it when
it exceeds the per-measure tolerance. Recalibration nudges the twin's
parameters toward observations by exponential smoothing
(new = old + alpha * (observed - old)), clamped so type invariants can't
break, and commits the updates as ordinary graph deltas. Falsification is a
separate, operator-facing judgment: a parameter whose recent residuals are
mostly flagged is frozen out of automatic smoothing until acknowledged.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..errors import DuplicateOpenPrediction
from ..graph.timeline import GraphTimeline
from ..ingest.pipeline import CleanRecord

# measure -> (kind, tolerance); abs = absolute units, rel = relative fraction
DEFAULT_TOLERANCES: dict[str, tuple[str, float]] = {
    "transit_time": ("abs", 1.0),
    "inventory": ("rel", 0.05),
    "cost_per_unit": ("rel", 0.01),
    "price": ("rel", 0.01),
}
FALLBACK_TOLERANCE = ("rel", 0.05)

DEFAULT_ALPHA = 0.3
DEFAULT_WINDOW = 20
DEFAULT_MIN_SAMPLES = 5
DEFAULT_FALSIFY_THRESHOLD = 0.6

# measure -> clamp bounds applied after smoothing
_CLAMPS: dict[str, tuple[float, float]] = {
    "transit_time": (1.0, float("inf")),
    "reliability": (0.0, 1.0),
    "inventory": (0.0, float("inf")),
    "capacity": (0.0, float("inf")),
}


@dataclass
class PredictionRecord:
    id: int
    issued_tick: int
    subject: str
    measure: str
    predicted: float
    target_tick: int
    provenance: str = ""
    status: str = "open"  # open | closed | expired

    def key(self) -> tuple[str, str, int]:
        return (self.subject, self.measure, self.target_tick)

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.id, "issued_tick": self.issued_tick,
                "subject": self.subject, "measure": self.measure,
                "predicted": self.predicted, "target_tick": self.target_tick,
                "provenance": self.provenance, "status": self.status}


@dataclass
class Discrepancy:
    prediction_id: int
    subject: str
    measure: str
    predicted: float
    observed: float
    residual: float
    flagged: bool
    tick: int

    def to_dict(self) -> dict[str, Any]:
        return {"prediction_id": self.prediction_id, "subject": self.subject,
                "measure": self.measure, "predicted": self.predicted,
                "observed": self.observed, "residual": self.residual,
                "flagged": self.flagged, "tick": self.tick}


def is_flagged(measure: str, predicted: float, residual: float,
               tolerances: dict[str, tuple[str, float]] | None = None) -> bool:
    kind, tol = (tolerances or DEFAULT_TOLERANCES).get(measure, FALLBACK_TOLERANCE)
    if kind == "abs":
        return abs(residual) > tol
    base = max(abs(predicted), 1e-12)
    return abs(residual) / base > tol


@dataclass
class ParameterCalibration:
    subject: str
    measure: str
    alpha: float = DEFAULT_ALPHA
    belief: float | None = None
    flags: deque = field(default_factory=lambda: deque(maxlen=DEFAULT_WINDOW))
    falsified: bool = False
    acknowledged: bool = False
    updates: int = 0
    clamps: int = 0

    @property
    def param_id(self) -> str:
        return f"{self.subject}:{self.measure}"

    def to_dict(self) -> dict[str, Any]:
        return {"subject": self.subject, "measure": self.measure,
                "alpha": self.alpha, "belief": self.belief,
                "window": list(self.flags), "falsified": self.falsified,
                "acknowledged": self.acknowledged, "updates": self.updates,
                "clamps": self.clamps}


class FeedbackLoop:
    """Prediction store + calibration state, optionally audit-logged."""

    def __init__(self, timeline: GraphTimeline,
                 tolerances: dict[str, tuple[str, float]] | None = None,
                 alpha: float = DEFAULT_ALPHA,
                 alpha_per_measure: dict[str, float] | None = None,
                 window: int = DEFAULT_WINDOW,
                 min_samples: int = DEFAULT_MIN_SAMPLES,
                 falsify_threshold: float = DEFAULT_FALSIFY_THRESHOLD,
                 audit_log_path: str | Path | None = None):
        self.timeline = timeline
        self.tolerances = dict(tolerances or DEFAULT_TOLERANCES)
        self.alpha = alpha
        self.alpha_per_measure = dict(alpha_per_measure or {})
        self.window = window
        self.min_samples = min_samples
        self.falsify_threshold = falsify_threshold
        self.predictions: dict[int, PredictionRecord] = {}
        self._open_keys: dict[tuple[str, str, int], int] = {}
        self.calibrations: dict[str, ParameterCalibration] = {}
        self._next_id = 0
        self._audit_path = Path(audit_log_path) if audit_log_path else None

    # ------------------------------------------------------------ predictions

    def record_prediction(self, issued_tick: int, subject: str, measure: str,
                          predicted: float, target_tick: int,
                          provenance: str = "") -> int:
        key = (subject, measure, target_tick)
        if key in self._open_keys:
            raise DuplicateOpenPrediction(
                f"open prediction already exists for {key}")
        rec = PredictionRecord(
            id=self._next_id, issued_tick=issued_tick, subject=subject,
            measure=measure, predicted=float(predicted),
            target_tick=target_tick, provenance=provenance)
        self.predictions[rec.id] = rec
        self._open_keys[key] = rec.id
        self._next_id += 1
        self._audit({"kind": "prediction", **rec.to_dict()})
        return rec.id

    def reconcile(self, observations: list[CleanRecord]) -> list[Discrepancy]:
        """Close open predictions against matching observations."""
        out: list[Discrepancy] = []
        for obs in observations:
            key = (obs.subject, obs.measure, obs.observed_tick)
            pid = self._open_keys.pop(key, None)
            if pid is None:
                continue  # unmatched observations are ingestion's concern
            rec = self.predictions[pid]
            rec.status = "closed"
            residual = obs.value - rec.predicted
            disc = Discrepancy(
                prediction_id=pid, subject=rec.subject, measure=rec.measure,
                predicted=rec.predicted, observed=obs.value, residual=residual,
                flagged=is_flagged(rec.measure, rec.predicted, residual,
                                   self.tolerances),
                tick=obs.observed_tick)
            out.append(disc)
            self._audit({"kind": "discrepancy", **disc.to_dict()})
        return out

    def expire_stale(self, current_tick: int, lateness_window: int = 10,
                     alert_engine=None) -> list[PredictionRecord]:
        expired = []
        for key, pid in list(self._open_keys.items()):
            rec = self.predictions[pid]
            if rec.target_tick + lateness_window < current_tick:
                rec.status = "expired"
                del self._open_keys[key]
                expired.append(rec)
                if alert_engine is not None:
                    alert_engine.raise_alert(
                        tick=current_tick, severity="info", subject=rec.subject,
                        rule="prediction_expired",
                        message=f"prediction {pid} for {rec.measure} at tick "
                                f"{rec.target_tick} expired unobserved")
                self._audit({"kind": "expired", **rec.to_dict()})
        return expired

    # ------------------------------------------------------------ calibration

    def _calibration_for(self, subject: str, measure: str) -> ParameterCalibration:
        key = f"{subject}:{measure}"
        cal = self.calibrations.get(key)
        if cal is None:
            cal = ParameterCalibration(
                subject=subject, measure=measure,
                alpha=self.alpha_per_measure.get(measure, self.alpha),
                flags=deque(maxlen=self.window))
            self.calibrations[key] = cal
        return cal

    def _current_value(self, subject: str, measure: str) -> float | None:
        node = self.timeline.current_node(subject)
        if node is not None:
            if measure == "inventory":
                return float(node.state.inventory)
            if measure in node.attrs:
                return float(node.attrs[measure])
            return None
        edge = self.timeline.current_edge(subject)
        if edge is not None and hasattr(edge.weights, measure):
            return float(getattr(edge.weights, measure))
        if edge is not None and measure == "price":
            return edge.weights.cost_per_unit
        return None

    def recalibrate(self, discrepancies: list[Discrepancy],
                    commit_tick: int | None = None) -> list:
        """Exponential smoothing toward observations; one delta per changed
        parameter. Falsified parameters are frozen until acknowledged."""
        deltas = []
        tick = commit_tick if commit_tick is not None else self.timeline.max_tick
        for disc in sorted(discrepancies,
                           key=lambda d: (d.subject, d.measure, d.tick)):
            cal = self._calibration_for(disc.subject, disc.measure)
            cal.flags.append(bool(disc.flagged))
            if cal.falsified and not cal.acknowledged:
                continue
            old = cal.belief
            if old is None:
                current = self._current_value(disc.subject, disc.measure)
                old = current if current is not None else disc.predicted
            new = old + cal.alpha * (disc.observed - old)
            lo, hi = _CLAMPS.get(disc.measure, (float("-inf"), float("inf")))
            clamped = min(hi, max(lo, new))
            if clamped != new:
                cal.clamps += 1
                self._audit({"kind": "clamp", "param": cal.param_id,
                             "raw": new, "clamped": clamped})
            new = clamped
            cal.updates += 1
            if abs(new - old) <= 1e-12:
                cal.belief = new
                continue  # delta suppressed: no observable change
            cal.belief = new
            delta = self._commit(disc.subject, disc.measure, new, tick)
            if delta is not None:
                deltas.append(delta)
            self._audit({"kind": "recalibrate", "param": cal.param_id,
                         "old": old, "new": new, "tick": tick})
        return deltas

    def _commit(self, subject: str, measure: str, value: float, tick: int):
        node = self.timeline.current_node(subject)
        if node is not None:
            if measure == "inventory":
                return self.timeline.set_node_attr(tick, subject,
                                                   "state.inventory", int(round(value)))
            return self.timeline.set_node_attr(tick, subject,
                                               f"attrs.{measure}", value)
        edge = self.timeline.current_edge(subject)
        if edge is not None:
            field_name = "cost_per_unit" if measure == "price" else measure
            if hasattr(edge.weights, field_name):
                if field_name == "capacity":
                    value = int(round(value))
                return self.timeline.set_edge_weight(tick, subject,
                                                     field_name, value)
        return None

    def update_reliability_from_outcomes(self, subject: str,
                                         commit_tick: int | None = None):
        """Reliability tracks the on-time fraction in the residual window."""
        cal = self.calibrations.get(f"{subject}:transit_time")
        if cal is None or not cal.flags:
            return None
        on_time = cal.flags.count(False) / len(cal.flags)
        rel_cal = self._calibration_for(subject, "reliability")
        old = rel_cal.belief
        if old is None:
            edge = self.timeline.current_edge(subject)
            old = edge.weights.reliability if edge is not None else 1.0
        new = min(1.0, max(0.0, old + rel_cal.alpha * (on_time - old)))
        rel_cal.belief = new
        rel_cal.updates += 1
        if abs(new - old) <= 1e-12:
            return None
        tick = commit_tick if commit_tick is not None else self.timeline.max_tick
        return self._commit(subject, "reliability", new, tick)

    # ------------------------------------------------------------ falsify

    def falsify(self) -> dict[str, Any]:
        """Report falsified parameters (flagged fraction >= threshold over the
        window). Parameters with too few samples are reported, not judged."""
        falsified: list[str] = []
        insufficient: list[str] = []
        for key in sorted(self.calibrations):
            cal = self.calibrations[key]
            n = len(cal.flags)
            if n < self.min_samples:
                insufficient.append(key)
                continue
            fraction = sum(1 for f in cal.flags if f) / n
            if fraction >= self.falsify_threshold:
                if not cal.falsified:
                    cal.falsified = True
                    cal.acknowledged = False
                    self._audit({"kind": "falsified", "param": key,
                                 "fraction": fraction, "samples": n})
                falsified.append(key)
        return {"falsified": falsified, "insufficient_samples": insufficient}

    def acknowledge(self, param_id: str) -> bool:
        cal = self.calibrations.get(param_id)
        if cal is None or not cal.falsified:
            return False
        cal.falsified = False
        cal.acknowledged = True
        cal.flags.clear()
        self._audit({"kind": "acknowledged", "param": param_id})
        return True

    # ------------------------------------------------------------ accounting

    def record_counts(self) -> dict[str, int]:
        counts = {"open": 0, "closed": 0, "expired": 0}
        for rec in self.predictions.values():
            counts[rec.status] += 1
        counts["total"] = len(self.predictions)
        return counts

    def to_dict(self) -> dict[str, Any]:
        return {
            "predictions": [self.predictions[k].to_dict()
                            for k in sorted(self.predictions)],
            "calibrations": {k: self.calibrations[k].to_dict()
                             for k in sorted(self.calibrations)},
            "counts": self.record_counts(),
        }

    def _audit(self, entry: dict[str, Any]) -> None:
        if self._audit_path is None:
            return
        self._audit_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self._audit_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
