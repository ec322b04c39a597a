"""ETL pipeline: extract raw telemetry, clean it, load it as graph deltas.

Extraction is per-line and total: every input line becomes exactly one
RawEvent or one rejection (line number + reason), order preserved.
Transformation deduplicates on (source, source_event_id), normalizes units,
enforces the measure range table, and imputes gaps (last observation
carried forward, then declared default, else the record drops with
"no-basis"). Loading turns records into timeline deltas keyed by
provenance, which makes replays idempotent: a record that already reached
the log is skipped, never double-applied.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable

from ..graph.timeline import GraphTimeline


class SourceKind(str, Enum):
    IOT = "iot"
    ERP = "erp"
    LOGISTICS = "logistics"
    PUBLIC = "public"


@dataclass
class RawEvent:
    source: SourceKind
    source_event_id: str
    observed_tick: int
    subject: str
    measure: str
    value: Any            # None marks a gap to impute
    received_seq: int = 0
    unit: str | None = None

    @property
    def key(self) -> tuple[str, str]:
        return (self.source.value, self.source_event_id)

    def to_dict(self) -> dict[str, Any]:
        d = {"source": self.source.value,
             "source_event_id": self.source_event_id,
             "observed_tick": self.observed_tick, "subject": self.subject,
             "measure": self.measure, "value": self.value}
        if self.unit:
            d["unit"] = self.unit
        return d


@dataclass
class Rejection:
    line_no: int
    reason: str
    raw: str


@dataclass
class Drop:
    event: RawEvent
    reason: str  # duplicate | range | no-basis | unknown_subject | stale


@dataclass
class CleanRecord:
    subject: str
    measure: str
    value: float
    observed_tick: int
    provenance: tuple[str, str]
    imputed: bool = False
    imputation_method: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"subject": self.subject, "measure": self.measure,
                "value": self.value, "observed_tick": self.observed_tick,
                "provenance": list(self.provenance), "imputed": self.imputed,
                "imputation_method": self.imputation_method}


# measure -> (lo, hi) validity range after unit normalization
RANGE_TABLE: dict[str, tuple[float, float]] = {
    "inventory": (0.0, float("inf")),
    "reliability": (0.0, 1.0),
    "temperature": (-100.0, 200.0),
    "transit_time": (1.0, float("inf")),
    "demand": (0.0, float("inf")),
    "capacity": (0.0, float("inf")),
    "carbon_intensity": (0.0, float("inf")),
}

# per-measure unit conversions to the canonical unit
UNIT_REGISTRY: dict[str, dict[str, Callable[[float], float]]] = {
    "temperature": {
        "C": lambda v: v,
        "F": lambda v: (v - 32.0) * 5.0 / 9.0,
        "K": lambda v: v - 273.15,
    },
    "carbon_intensity": {
        "kg": lambda v: v,
        "t": lambda v: v * 1000.0,
    },
}

# measure -> how a clean record lands on the graph
#   ("node", field) / ("edge", field) / ("either", node_field, edge_field)
MEASURE_TARGETS: dict[str, tuple] = {
    "inventory": ("node", "state.inventory"),
    "demand": ("node", "attrs.demand_rate"),
    "temperature": ("node", "state.temperature"),
    "carbon_intensity": ("node", "attrs.carbon_intensity"),
    "transit_time": ("edge", "transit_time"),
    "price": ("edge", "cost_per_unit"),
    "reliability": ("either", "attrs.reliability", "reliability"),
    "capacity": ("either", "attrs.capacity", "capacity"),
    "disruption_flag": ("alert_only",),
}

_REQUIRED_FIELDS = ("source_event_id", "observed_tick", "subject", "measure")


def extract(lines: list[str], source: SourceKind, start_seq: int = 0
            ) -> tuple[list[RawEvent], list[Rejection]]:
    """Parse newline-delimited records; one RawEvent or Rejection per line."""
    events: list[RawEvent] = []
    rejections: list[Rejection] = []
    seq = start_seq
    for line_no, line in enumerate(lines, start=1):
        raw = line.strip()
        if not raw:
            continue
        try:
            payload = json.loads(raw)
        except json.JSONDecodeError:
            rejections.append(Rejection(line_no, "malformed record", raw))
            continue
        if not isinstance(payload, dict):
            rejections.append(Rejection(line_no, "not an object", raw))
            continue
        missing = [f for f in _REQUIRED_FIELDS
                   if payload.get(f) is None or str(payload[f]).strip() == ""]
        if missing:
            rejections.append(Rejection(line_no, f"missing {missing[0]}", raw))
            continue
        try:
            tick = int(payload["observed_tick"])
        except (TypeError, ValueError):
            rejections.append(Rejection(line_no, "invalid observed_tick", raw))
            continue
        if tick < 0:
            rejections.append(Rejection(line_no, "negative observed_tick", raw))
            continue
        events.append(RawEvent(
            source=source,
            source_event_id=str(payload["source_event_id"]),
            observed_tick=tick,
            subject=str(payload["subject"]),
            measure=str(payload["measure"]),
            value=payload.get("value"),
            unit=payload.get("unit"),
            received_seq=seq,
        ))
        seq += 1
    return events, rejections


@dataclass
class TransformState:
    """Carried across batches: dedup keys, LOCF memory, declared defaults."""

    seen: set[tuple[str, str]] = field(default_factory=set)
    last_value: dict[tuple[str, str], float] = field(default_factory=dict)
    defaults: dict[str, float] = field(default_factory=dict)  # per measure
    subject_defaults: dict[tuple[str, str], float] = field(default_factory=dict)
    known_subject: Callable[[str], bool] | None = None


def _normalize(measure: str, value: float, unit: str | None) -> float:
    if unit and measure in UNIT_REGISTRY:
        conv = UNIT_REGISTRY[measure].get(unit)
        if conv is not None:
            return conv(value)
    return value


def transform(events: list[RawEvent], state: TransformState
              ) -> tuple[list[CleanRecord], list[Drop], list[RawEvent]]:
    """Returns (clean records, drops, parked-for-retry events)."""
    records: list[CleanRecord] = []
    drops: list[Drop] = []
    parked: list[RawEvent] = []
    for ev in sorted(events, key=lambda e: e.received_seq):
        if ev.key in state.seen:
            drops.append(Drop(ev, "duplicate"))
            continue
        state.seen.add(ev.key)
        if state.known_subject is not None and not state.known_subject(ev.subject):
            parked.append(ev)
            continue
        imputed = False
        method = None
        value = ev.value
        if value is None:
            locf = state.last_value.get((ev.subject, ev.measure))
            if locf is not None:
                value, imputed, method = locf, True, "locf"
            else:
                default = state.subject_defaults.get((ev.subject, ev.measure),
                                                     state.defaults.get(ev.measure))
                if default is not None:
                    value, imputed, method = default, True, "default"
                else:
                    drops.append(Drop(ev, "no-basis"))
                    continue
        if ev.measure == "disruption_flag":
            value = 1.0 if value else 0.0
        else:
            try:
                value = float(value)
            except (TypeError, ValueError):
                drops.append(Drop(ev, "range"))
                continue
            value = _normalize(ev.measure, value, ev.unit)
            lo, hi = RANGE_TABLE.get(ev.measure, (float("-inf"), float("inf")))
            if not (lo <= value <= hi):
                drops.append(Drop(ev, "range"))
                continue
        state.last_value[(ev.subject, ev.measure)] = value
        records.append(CleanRecord(
            subject=ev.subject, measure=ev.measure, value=value,
            observed_tick=ev.observed_tick, provenance=ev.key,
            imputed=imputed, imputation_method=method))
    return records, drops, parked


@dataclass
class LoadResult:
    applied: int = 0
    skipped_duplicates: int = 0
    parked: list[CleanRecord] = field(default_factory=list)
    alerts: list = field(default_factory=list)


def load(records: list[CleanRecord], timeline: GraphTimeline,
         alert_engine=None, lateness_window: int = 10) -> LoadResult:
    """Apply clean records as graph deltas. Idempotent under replay: records
    whose provenance is already in the log are skipped. Records older than
    the committed horizon minus the lateness window are parked."""
    result = LoadResult()
    horizon = timeline.max_tick - lateness_window
    for rec in records:
        if timeline.has_provenance(rec.provenance):
            result.skipped_duplicates += 1
            continue
        if rec.observed_tick < horizon:
            result.parked.append(rec)
            if alert_engine is not None:
                alert_engine.raise_alert(
                    tick=rec.observed_tick, severity="info", subject=rec.subject,
                    rule="stale_tick",
                    message=f"record at tick {rec.observed_tick} behind horizon "
                            f"{horizon}; parked")
            continue
        target = MEASURE_TARGETS.get(rec.measure)
        applied = False
        if target is None or target[0] == "alert_only":
            applied = True  # nothing to write; alerts below
        elif target[0] == "node" or (target[0] == "either"
                                     and timeline.current_node(rec.subject)):
            field_name = target[1]
            if timeline.current_node(rec.subject) is not None:
                value = int(rec.value) if field_name == "state.inventory" else rec.value
                timeline.set_node_attr(rec.observed_tick, rec.subject,
                                       field_name, value,
                                       provenance=rec.provenance)
                applied = True
        if not applied and target[0] in ("edge", "either"):
            field_name = target[2] if target[0] == "either" else target[1]
            if timeline.current_edge(rec.subject) is not None:
                timeline.set_edge_weight(rec.observed_tick, rec.subject,
                                         field_name, rec.value,
                                         provenance=rec.provenance)
                applied = True
        if not applied:
            result.parked.append(rec)
            continue
        result.applied += 1
        if alert_engine is not None:
            result.alerts.extend(alert_engine.evaluate(rec, timeline))
    return result
