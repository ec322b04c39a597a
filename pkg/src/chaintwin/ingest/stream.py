"""Streaming ingestion: bounded intake queue, one consumer, counters.

Producers enqueue raw lines from any thread; the queue is bounded and a
full queue rejects with QueueFull (backpressure is the producer's problem
by contract). Exactly one consumer drains the queue and runs
extract -> transform -> load, preserving intake order, so per-source total
order is maintained. Counters are updated under a lock and readable from
any thread.
"""

from __future__ import annotations

import queue
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO

from ..errors import QueueFull
from ..graph.timeline import GraphTimeline
from .alerts import AlertEngine
from .pipeline import (
    CleanRecord,
    Drop,
    Rejection,
    SourceKind,
    TransformState,
    extract,
    load,
    transform,
)


@dataclass
class IngestCounters:
    received: int = 0
    rejected: int = 0
    committed: int = 0
    dropped: int = 0
    parked: int = 0
    duplicates_skipped: int = 0
    alerts: int = 0
    batches: int = 0
    busy_seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "received": self.received, "rejected": self.rejected,
            "committed": self.committed, "dropped": self.dropped,
            "parked": self.parked,
            "duplicates_skipped": self.duplicates_skipped,
            "alerts": self.alerts, "batches": self.batches,
            "busy_seconds": round(self.busy_seconds, 6),
            "events_per_second": (round(self.committed / self.busy_seconds, 1)
                                  if self.busy_seconds > 0 else 0.0),
        }


class StreamIngestor:
    """Bounded-queue intake in front of the ETL pipeline."""

    def __init__(self, timeline: GraphTimeline, alert_engine: AlertEngine,
                 queue_bound: int = 10_000, lateness_window: int = 10,
                 drop_log_path: str | Path | None = None,
                 post_load=None):
        self.timeline = timeline
        self.alerts = alert_engine
        self.lateness_window = lateness_window
        self.post_load = post_load  # callback(list[CleanRecord]) after commit
        self.state = TransformState(known_subject=timeline.knows_subject)
        self.counters = IngestCounters()
        self._queue: queue.Queue = queue.Queue(maxsize=queue_bound)
        self._lock = threading.Lock()
        self._seq = 0
        self._drop_log: IO[str] | None = None
        if drop_log_path:
            Path(drop_log_path).parent.mkdir(parents=True, exist_ok=True)
            self._drop_log = open(drop_log_path, "a", encoding="utf-8")
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    # ------------------------------------------------------------ producers

    def submit(self, line: str, source: SourceKind = SourceKind.IOT) -> None:
        """Enqueue one raw line; raises QueueFull when the bound is hit."""
        try:
            self._queue.put_nowait((line, source, time.monotonic()))
        except queue.Full:
            raise QueueFull(
                f"intake queue at bound {self._queue.maxsize}") from None

    @property
    def queued(self) -> int:
        return self._queue.qsize()

    # ------------------------------------------------------------ consumer

    def drain(self, max_items: int | None = None) -> int:
        """Consume queued lines synchronously; returns lines processed."""
        processed = 0
        batch: list[tuple[str, SourceKind, float]] = []
        while max_items is None or processed + len(batch) < max_items:
            try:
                batch.append(self._queue.get_nowait())
            except queue.Empty:
                break
        if batch:
            self._process(batch)
            processed += len(batch)
        return processed

    def ingest_batch(self, lines: list[str], source: SourceKind
                     ) -> tuple[int, int, int, int]:
        """Run extract/transform/load on a batch directly (no queue).

        Returns (applied, parked, dropped, rejected).
        """
        started = time.monotonic()
        events, rejections = extract(lines, source, start_seq=self._seq)
        self._seq += len(events)
        records, drops, parked_events = transform(events, self.state)
        result = load(records, self.timeline, self.alerts, self.lateness_window)
        self._log_drops(rejections, drops, parked_events, result.parked)
        if self.post_load is not None and records:
            self.post_load(records)
        with self._lock:
            self.counters.received += len(lines)
            self.counters.rejected += len(rejections)
            self.counters.committed += result.applied
            self.counters.dropped += len(drops)
            self.counters.parked += len(parked_events) + len(result.parked)
            self.counters.duplicates_skipped += result.skipped_duplicates
            self.counters.alerts += len(result.alerts)
            self.counters.batches += 1
            self.counters.busy_seconds += time.monotonic() - started
        dropped = len(drops)
        parked = len(parked_events) + len(result.parked)
        applied = result.applied + result.skipped_duplicates
        return applied, parked, dropped, len(rejections)

    def _process(self, batch: list[tuple[str, SourceKind, float]]) -> None:
        by_source: dict[SourceKind, list[str]] = {}
        for line, source, _enqueued in batch:
            by_source.setdefault(source, []).append(line)
        for source in sorted(by_source, key=lambda s: s.value):
            self.ingest_batch(by_source[source], source)

    def _log_drops(self, rejections: list[Rejection], drops: list[Drop],
                   parked_events, parked_records: list[CleanRecord]) -> None:
        if self._drop_log is None:
            return
        import json
        for r in rejections:
            self._drop_log.write(json.dumps(
                {"kind": "rejection", "line_no": r.line_no, "reason": r.reason,
                 "raw": r.raw}, sort_keys=True) + "\n")
        for d in drops:
            self._drop_log.write(json.dumps(
                {"kind": "drop", "reason": d.reason, **d.event.to_dict()},
                sort_keys=True) + "\n")
        for ev in parked_events:
            self._drop_log.write(json.dumps(
                {"kind": "park", "reason": "unknown_subject", **ev.to_dict()},
                sort_keys=True) + "\n")
        for rec in parked_records:
            self._drop_log.write(json.dumps(
                {"kind": "park", "reason": "stale_or_unmapped", **rec.to_dict()},
                sort_keys=True) + "\n")
        self._drop_log.flush()

    # ------------------------------------------------------------ lifecycle

    def start(self) -> None:
        if self._thread is not None:
            return
        self._stop.clear()
        self._thread = threading.Thread(target=self._loop, daemon=True,
                                        name="chaintwin-ingest")
        self._thread.start()

    def _loop(self) -> None:
        while not self._stop.is_set():
            if self.drain(max_items=1000) == 0:
                time.sleep(0.005)

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None
        self.drain()
        if self._drop_log is not None:
            self._drop_log.close()
            self._drop_log = None
