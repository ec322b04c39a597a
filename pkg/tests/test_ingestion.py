"""ETL: extraction, dedup, imputation, idempotent load, stream backpressure."""

import json
import random

import pytest

from chaintwin.errors import QueueFull
from chaintwin.graph import EntityKind, GraphTimeline
from chaintwin.ingest import (
    AlertEngine,
    SourceKind,
    StreamIngestor,
    TransformState,
    extract,
    load,
    transform,
)
from helpers import edge, node


def event_line(eid, subject="A", measure="inventory", value=7, tick=0, **extra):
    d = {"source_event_id": eid, "observed_tick": tick, "subject": subject,
         "measure": measure, "value": value}
    d.update(extra)
    return json.dumps(d)


def fresh_timeline():
    tl = GraphTimeline()
    tl.add_node(0, node("A", EntityKind.WAREHOUSE, inventory=40))
    tl.add_node(0, node("B", EntityKind.CUSTOMER))
    tl.add_edge(0, edge("E1", "A", "B"))
    return tl


def test_extract_well_formed_line():
    events, rejections = extract([event_line("e1")], SourceKind.IOT)
    assert len(events) == 1 and not rejections
    assert events[0].source_event_id == "e1"
    assert events[0].measure == "inventory"


def test_extract_missing_id_rejected():
    events, rejections = extract([event_line("")], SourceKind.IOT)
    assert not events
    assert rejections[0].reason == "missing source_event_id"
    assert rejections[0].line_no == 1


def test_extract_empty_batch():
    events, rejections = extract([], SourceKind.ERP)
    assert events == [] and rejections == []


def test_extract_preserves_order_and_line_numbers():
    lines = [event_line("a"), "not json", event_line("b")]
    events, rejections = extract(lines, SourceKind.IOT)
    assert [e.source_event_id for e in events] == ["a", "b"]
    assert rejections[0].line_no == 2


def test_transform_dedup_same_source_id():
    events, _ = extract([event_line("dup", value=1), event_line("dup", value=2)],
                        SourceKind.IOT)
    records, drops, parked = transform(events, TransformState())
    assert len(records) == 1 and records[0].value == 1
    assert len(drops) == 1 and drops[0].reason == "duplicate"


def test_transform_locf_imputation():
    events, _ = extract([event_line("e1", value=40),
                         event_line("e2", value=None, tick=1)], SourceKind.IOT)
    records, drops, _ = transform(events, TransformState())
    assert len(records) == 2
    assert records[1].value == 40
    assert records[1].imputed and records[1].imputation_method == "locf"


def test_transform_default_then_no_basis():
    state = TransformState(defaults={"inventory": 9})
    events, _ = extract([event_line("e1", value=None),
                         event_line("e2", subject="B", measure="temperature",
                                    value=None)], SourceKind.IOT)
    records, drops, _ = transform(events, state)
    assert records[0].value == 9 and records[0].imputation_method == "default"
    assert drops[0].reason == "no-basis"


def test_transform_range_drop():
    events, _ = extract([event_line("e1", measure="temperature", value=-300)],
                        SourceKind.IOT)
    records, drops, _ = transform(events, TransformState())
    assert not records
    assert drops[0].reason == "range"


def test_transform_unit_normalization():
    events, _ = extract([event_line("e1", measure="temperature", value=212,
                                    unit="F")], SourceKind.IOT)
    records, _, _ = transform(events, TransformState())
    assert records[0].value == 100.0


def test_transform_unknown_subject_parked():
    tl = fresh_timeline()
    state = TransformState(known_subject=tl.knows_subject)
    events, _ = extract([event_line("e1", subject="GHOST")], SourceKind.IOT)
    records, drops, parked = transform(events, state)
    assert not records and not drops
    assert len(parked) == 1


def test_load_applies_delta_and_fires_alert():
    tl = fresh_timeline()
    engine = AlertEngine()
    events, _ = extract([event_line("e1", value=3, tick=1)], SourceKind.IOT)
    records, _, _ = transform(events, TransformState())
    result = load(records, tl, engine)
    assert result.applied == 1
    assert tl.current_node("A").state.inventory == 3
    assert result.alerts and result.alerts[0].rule == "low_inventory"
    assert result.alerts[0].severity == "critical"


def test_load_replay_is_idempotent():
    tl = fresh_timeline()
    engine = AlertEngine()
    events, _ = extract([event_line("e1", value=12, tick=1),
                         event_line("e2", value=8, tick=2)], SourceKind.IOT)
    records, _, _ = transform(events, TransformState())
    load(records, tl, engine)
    h1 = tl.snapshot_at(5).content_hash()
    n_deltas = len(tl.deltas)
    result = load(records, tl, engine)  # replay the same clean records
    assert result.applied == 0
    assert result.skipped_duplicates == 2
    assert len(tl.deltas) == n_deltas
    assert tl.snapshot_at(5).content_hash() == h1


def test_load_empty_records():
    tl = fresh_timeline()
    result = load([], tl, AlertEngine())
    assert result.applied == 0 and not result.alerts


def test_load_stale_tick_parked_with_info_alert():
    tl = fresh_timeline()
    tl.set_node_attr(40, "A", "state.inventory", 11)  # horizon now 40
    engine = AlertEngine()
    events, _ = extract([event_line("old", value=6, tick=2)], SourceKind.IOT)
    records, _, _ = transform(events, TransformState())
    result = load(records, tl, engine, lateness_window=10)
    assert result.applied == 0
    assert len(result.parked) == 1
    alerts = engine.all()
    assert alerts and alerts[0].rule == "stale_tick" and alerts[0].severity == "info"


def test_alert_dedup_per_rule_subject_tick():
    engine = AlertEngine()
    a1 = engine.raise_alert(1, "critical", "A", "low_inventory", "x")
    a2 = engine.raise_alert(1, "critical", "A", "low_inventory", "x again")
    assert a1 is not None and a2 is None
    assert len(engine.all()) == 1


def test_end_to_end_batch_idempotent_replay():
    rng = random.Random(4)
    tl = fresh_timeline()
    ingestor = StreamIngestor(tl, AlertEngine())
    lines = [event_line(f"e{i}", value=rng.randint(0, 50), tick=rng.randint(0, 5))
             for i in range(200)]
    ingestor.ingest_batch(lines, SourceKind.ERP)
    h1 = tl.snapshot_at(10).content_hash()
    ingestor.ingest_batch(lines, SourceKind.ERP)  # same batch again
    assert tl.snapshot_at(10).content_hash() == h1


def test_queue_bound_rejects_with_queue_full():
    tl = fresh_timeline()
    ingestor = StreamIngestor(tl, AlertEngine(), queue_bound=100)
    for i in range(100):
        ingestor.submit(event_line(f"q{i}"))
    with pytest.raises(QueueFull):
        ingestor.submit(event_line("q100"))
    assert ingestor.queued == 100
    ingestor.drain()
    assert ingestor.queued == 0
    assert ingestor.counters.committed == 100


def test_counters_reconcile():
    tl = fresh_timeline()
    ingestor = StreamIngestor(tl, AlertEngine())
    lines = ([event_line(f"g{i}", value=10 + i, tick=i % 3) for i in range(50)]
             + [event_line("g0", value=99)]            # duplicate
             + [event_line("bad", measure="temperature", value=-999)]  # range
             + ["{broken"])                            # rejection
    applied, parked, dropped, rejected = ingestor.ingest_batch(
        lines, SourceKind.LOGISTICS)
    c = ingestor.counters
    assert c.received == len(lines)
    assert c.committed == 50
    assert c.dropped == 2  # duplicate + range
    assert c.rejected == 1
    assert c.committed + c.dropped + c.rejected + c.parked == c.received


def test_drop_log_written(tmp_path):
    tl = fresh_timeline()
    path = tmp_path / "drops.log"
    ingestor = StreamIngestor(tl, AlertEngine(), drop_log_path=path)
    ingestor.ingest_batch([event_line("x", measure="temperature", value=-999)],
                          SourceKind.IOT)
    ingestor.stop()
    entries = [json.loads(line) for line in path.read_text().splitlines()]
    assert entries[0]["kind"] == "drop" and entries[0]["reason"] == "range"


def test_dedup_exactness_brute_force():
    # distinct (source, id) pairs == clean records + non-duplicate outcomes,
    # checked against an independent set count over random multisets
    rng = random.Random(606)
    for _ in range(30):
        n = rng.randint(1, 120)
        lines = []
        for i in range(n):
            eid = f"k{rng.randint(0, 40)}"  # forced collisions
            lines.append(event_line(eid, value=rng.randint(-5, 50),
                                    tick=rng.randint(0, 5),
                                    measure=rng.choice(["inventory", "temperature"])))
        events, rejections = extract(lines, SourceKind.IOT)
        assert not rejections
        distinct = len({ev.key for ev in events})
        records, drops, parked = transform(events, TransformState())
        duplicate_drops = sum(1 for d in drops if d.reason == "duplicate")
        other_drops = len(drops) - duplicate_drops
        assert duplicate_drops == len(events) - distinct
        assert len(records) + other_drops + len(parked) == distinct
