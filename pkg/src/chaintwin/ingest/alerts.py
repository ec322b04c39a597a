"""Threshold alerting with a monotone cursor for resumable streams.

Rules compare a clean record's measure value against a threshold. An alert
fires at most once per (rule, subject, tick); alerts on imputed values are
tagged so operators can judge them. The buffer hands out a monotone cursor
so stream clients can drop and resume without loss.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Any

SEVERITIES = ("info", "warning", "critical")
COMPARATORS = {
    "lt": lambda v, t: v < t,
    "le": lambda v, t: v <= t,
    "gt": lambda v, t: v > t,
    "ge": lambda v, t: v >= t,
    "eq": lambda v, t: v == t,
}


@dataclass
class AlertRule:
    name: str
    measure: str
    comparator: str
    threshold: float
    severity: str = "warning"

    def matches(self, measure: str, value: float) -> bool:
        return (measure == self.measure
                and COMPARATORS[self.comparator](value, self.threshold))

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "measure": self.measure,
                "comparator": self.comparator, "threshold": self.threshold,
                "severity": self.severity}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "AlertRule":
        return cls(name=d["name"], measure=d["measure"],
                   comparator=d["comparator"], threshold=float(d["threshold"]),
                   severity=d.get("severity", "warning"))


DEFAULT_RULES = [
    AlertRule(name="low_inventory", measure="inventory", comparator="lt",
              threshold=5, severity="critical"),
    AlertRule(name="disruption", measure="disruption_flag", comparator="ge",
              threshold=1, severity="critical"),
    AlertRule(name="long_transit", measure="transit_time", comparator="gt",
              threshold=10, severity="warning"),
]


@dataclass
class AlertEvent:
    id: int
    tick: int
    severity: str
    subject: str
    rule: str
    message: str
    acknowledged: bool = False
    imputed: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.id, "tick": self.tick, "severity": self.severity,
                "subject": self.subject, "rule": self.rule,
                "message": self.message, "acknowledged": self.acknowledged,
                "imputed": self.imputed}


class AlertEngine:
    """Rule evaluation + append-only alert buffer with cursor reads."""

    def __init__(self, rules: list[AlertRule] | None = None):
        self.rules = list(rules) if rules is not None else list(DEFAULT_RULES)
        self._alerts: list[AlertEvent] = []
        self._fired: set[tuple[str, str, int]] = set()
        self._lock = threading.Lock()

    def evaluate(self, record, timeline=None) -> list[AlertEvent]:
        out = []
        for rule in self.rules:
            if not rule.matches(record.measure, record.value):
                continue
            alert = self.raise_alert(
                tick=record.observed_tick, severity=rule.severity,
                subject=record.subject, rule=rule.name,
                message=(f"{rule.name}: {record.measure}={record.value:g} "
                         f"{rule.comparator} {rule.threshold:g} at {record.subject}"),
                imputed=record.imputed)
            if alert is not None:
                out.append(alert)
        return out

    def raise_alert(self, tick: int, severity: str, subject: str, rule: str,
                    message: str, imputed: bool = False) -> AlertEvent | None:
        with self._lock:
            key = (rule, subject, tick)
            if key in self._fired:
                return None  # at most one alert per (rule, subject, tick)
            self._fired.add(key)
            alert = AlertEvent(id=len(self._alerts), tick=tick,
                               severity=severity, subject=subject, rule=rule,
                               message=message, imputed=imputed)
            self._alerts.append(alert)
            return alert

    def since(self, cursor: int = 0, limit: int | None = None
              ) -> tuple[list[AlertEvent], int]:
        """Alerts with id >= cursor plus the next cursor."""
        with self._lock:
            window = self._alerts[cursor:]
            if limit is not None:
                window = window[:limit]
            next_cursor = (window[-1].id + 1) if window else cursor
            return list(window), next_cursor

    def acknowledge(self, alert_id: int) -> AlertEvent | None:
        with self._lock:
            if 0 <= alert_id < len(self._alerts):
                self._alerts[alert_id].acknowledged = True
                return self._alerts[alert_id]
            return None

    def all(self) -> list[AlertEvent]:
        with self._lock:
            return list(self._alerts)
