"""EngineHandle: one data directory, one engine.

Owns the timeline (and its append log), the alert buffer, the ingestion
pipeline, the scenario registry, the run registry, and the feedback loop.
Exactly one live handle per data directory, enforced with a pid lock file.
All writes funnel through the single-writer timeline; API reads are served
from immutable snapshots.

Data directory layout:

    config.yaml        engine configuration
    deltas.log         append-only graph delta log (replayed on open)
    alerts.log         append-only alert + ack log (replayed on open)
    drops.log          ETL rejections / drops / parks with reasons
    feedback.log       prediction & calibration audit trail
    scenarios/         registered scenario documents (YAML)
    runs/<id>/         per-run trace.json, kpis.json, status.json, plan.json
"""

from __future__ import annotations

import json
import os
import threading
import time
from pathlib import Path
from typing import Any

import yaml

from ..errors import ChainTwinError, UnknownNode
from ..analysis import (
    all_pairs_floyd_warshall,
    centrality,
    community_detect,
    critical_rank,
    shortest_path_bellman_ford,
    shortest_path_dijkstra,
)
from ..feedback import FeedbackLoop
from ..graph.timeline import GraphTimeline
from ..graph.types import LayerKind
from ..ingest.alerts import AlertEngine, AlertEvent
from ..ingest.stream import StreamIngestor
from ..ingest.pipeline import SourceKind
from ..kpi.reports import compute_kpis, kpi_series
from ..plan.planner import FlowPlan, greedy_baseline, plan_flows, validate_plan
from ..sim.engine import GreedyPolicy, SimTrace, run as sim_run
from ..sim.scenario import Scenario, SimConfig
from ..sim.whatif import what_if
from .config import EngineConfig


class PersistentAlertEngine(AlertEngine):
    """Alert buffer that journals alerts and acks for crash-safe resume."""

    def __init__(self, rules, log_path: Path):
        super().__init__(rules)
        self._path = log_path
        if log_path.exists():
            self._replay(log_path)

    def _replay(self, path: Path) -> None:
        for line in path.read_text(encoding="utf-8").splitlines():
            try:
                entry = json.loads(line)
            except json.JSONDecodeError:
                continue
            if entry.get("kind") == "ack":
                if 0 <= entry["id"] < len(self._alerts):
                    self._alerts[entry["id"]].acknowledged = True
                continue
            alert = AlertEvent(
                id=entry["id"], tick=entry["tick"], severity=entry["severity"],
                subject=entry["subject"], rule=entry["rule"],
                message=entry["message"],
                acknowledged=entry.get("acknowledged", False),
                imputed=entry.get("imputed", False))
            self._alerts.append(alert)
            self._fired.add((alert.rule, alert.subject, alert.tick))

    def _journal(self, entry: dict) -> None:
        with open(self._path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")

    def raise_alert(self, *args, **kwargs):
        alert = super().raise_alert(*args, **kwargs)
        if alert is not None:
            self._journal(alert.to_dict())
        return alert

    def acknowledge(self, alert_id: int):
        alert = super().acknowledge(alert_id)
        if alert is not None:
            self._journal({"kind": "ack", "id": alert_id})
        return alert


class EngineHandle:
    def __init__(self, config: EngineConfig):
        self.config = config
        self.data_dir = Path(config.data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        (self.data_dir / "scenarios").mkdir(exist_ok=True)
        (self.data_dir / "runs").mkdir(exist_ok=True)
        self._acquire_lock()

        self.timeline = GraphTimeline.load(self.data_dir / "deltas.log")
        self.alerts = PersistentAlertEngine(config.alert_rules,
                                            self.data_dir / "alerts.log")
        self.ingestor = StreamIngestor(
            self.timeline, self.alerts,
            queue_bound=config.queue_bound,
            lateness_window=config.lateness_window,
            drop_log_path=self.data_dir / "drops.log")
        self.feedback = FeedbackLoop(
            self.timeline,
            tolerances=config.tolerances or None,
            alpha=config.alpha,
            alpha_per_measure=config.alpha_per_measure,
            min_samples=config.falsify_min_samples,
            falsify_threshold=config.falsify_threshold,
            audit_log_path=self.data_dir / "feedback.log")
        self.ingestor.post_load = self._reconcile_records
        self.runs: dict[str, dict[str, Any]] = {}
        self._run_lock = threading.Lock()
        self._idempotency: dict[str, tuple[str, int, Any]] = {}
        self._load_runs()

    # ------------------------------------------------------------ lifecycle

    def _acquire_lock(self) -> None:
        lock = self.data_dir / ".lock"
        if lock.exists():
            try:
                pid = int(lock.read_text().strip())
                os.kill(pid, 0)  # raises if the process is gone
                raise ChainTwinError(
                    f"data dir {self.data_dir} locked by live pid {pid}")
            except (ValueError, ProcessLookupError, PermissionError):
                lock.unlink(missing_ok=True)  # stale lock
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        with os.fdopen(fd, "w") as fh:
            fh.write(str(os.getpid()))
        self._lock_path = lock

    def close(self) -> None:
        self.ingestor.stop()
        self.timeline.close()
        if getattr(self, "_lock_path", None) and self._lock_path.exists():
            self._lock_path.unlink()

    def __enter__(self) -> "EngineHandle":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # ------------------------------------------------------------ ingestion

    def _reconcile_records(self, records) -> None:
        """One feedback cycle per committed batch: reconcile + recalibrate."""
        discrepancies = self.feedback.reconcile(records)
        if discrepancies:
            self.feedback.recalibrate(discrepancies)

    def ingest_lines(self, lines: list[str], source: str = "iot"
                     ) -> dict[str, int]:
        applied, parked, dropped, rejected = self.ingestor.ingest_batch(
            lines, SourceKind(source))
        return {"accepted": applied, "parked": parked, "dropped": dropped,
                "rejected": rejected}

    # ------------------------------------------------------------ scenarios

    def register_scenario(self, document: dict[str, Any]) -> str:
        scenario = Scenario.from_dict(document)
        path = self.data_dir / "scenarios" / f"{scenario.name}.yaml"
        scenario.to_yaml(path)
        return scenario.name

    def get_scenario(self, scenario_id: str) -> Scenario:
        path = self.data_dir / "scenarios" / f"{scenario_id}.yaml"
        if not path.exists():
            raise UnknownNode(f"scenario {scenario_id!r} not registered")
        return Scenario.from_yaml(path)

    def list_scenarios(self) -> list[str]:
        return sorted(p.stem for p in (self.data_dir / "scenarios").glob("*.yaml"))

    # ------------------------------------------------------------ runs

    def _load_runs(self) -> None:
        for status_path in sorted((self.data_dir / "runs").glob("*/status.json")):
            try:
                status = json.loads(status_path.read_text(encoding="utf-8"))
                self.runs[status["run_id"]] = status
            except (json.JSONDecodeError, KeyError):
                continue

    def start_run(self, scenario_id: str, mode: str = "simulate",
                  seed: int = 0, horizon: int = 10,
                  background: bool = True) -> str:
        scenario = self.get_scenario(scenario_id)  # validates existence
        with self._run_lock:
            run_id = f"run-{len(self.runs):04d}"
            self.runs[run_id] = {"run_id": run_id, "status": "pending",
                                 "mode": mode, "scenario": scenario_id,
                                 "seed": seed, "horizon": horizon}
        if background:
            thread = threading.Thread(
                target=self._execute_run,
                args=(run_id, scenario, mode, seed, horizon), daemon=True)
            thread.start()
        else:
            self._execute_run(run_id, scenario, mode, seed, horizon)
        return run_id

    def _execute_run(self, run_id: str, scenario: Scenario, mode: str,
                     seed: int, horizon: int) -> None:
        run_dir = self.data_dir / "runs" / run_id
        run_dir.mkdir(parents=True, exist_ok=True)
        status = self.runs[run_id]
        status["status"] = "running"
        started = time.monotonic()
        try:
            cfg = SimConfig(horizon=horizon, seed=seed,
                            base_tick=self.timeline.max_tick)
            snap = self.timeline.snapshot_at(cfg.base_tick)
            plan = None
            if mode == "optimize":
                plan = plan_flows(snap, scenario, cfg, self.config.cost_model)
                plan.save(run_dir / "plan.json")
                trace = validate_plan(plan, snap, scenario, cfg,
                                      self.config.cost_model).trace
            else:
                trace = sim_run(snap, scenario, cfg, GreedyPolicy())
            kpis = compute_kpis(trace, snap, self.config.cost_model)
            (run_dir / "trace.json").write_text(
                json.dumps(trace.to_dict(), sort_keys=True), encoding="utf-8")
            (run_dir / "kpis.json").write_text(
                json.dumps(kpis.to_dict(), sort_keys=True, indent=2),
                encoding="utf-8")
            status.update({
                "status": "completed",
                "summary": trace.summary,
                "planned_cost": plan.planned_cost if plan else None,
                "elapsed_s": round(time.monotonic() - started, 3),
            })
            if trace.summary.get("unmet_demand", 0) > 0:
                self.alerts.raise_alert(
                    tick=self.timeline.max_tick, severity="critical",
                    subject=scenario.name, rule="run_unmet_demand",
                    message=(f"{run_id}: {trace.summary['unmet_demand']} units "
                             f"of demand unmet in scenario {scenario.name!r}"))
        except Exception as exc:  # recorded, surfaced via status
            status.update({"status": "failed", "error": str(exc)})
        (run_dir / "status.json").write_text(
            json.dumps(status, sort_keys=True, indent=2), encoding="utf-8")

    def get_run(self, run_id: str) -> dict[str, Any]:
        status = self.runs.get(run_id)
        if status is None:
            raise UnknownNode(f"run {run_id!r} unknown")
        return dict(status)

    def run_trace(self, run_id: str) -> SimTrace:
        path = self.data_dir / "runs" / run_id / "trace.json"
        if not path.exists():
            raise UnknownNode(f"run {run_id!r} has no trace")
        return SimTrace.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def run_kpis(self, run_id: str) -> dict[str, Any] | None:
        path = self.data_dir / "runs" / run_id / "kpis.json"
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def latest_completed_run(self) -> str | None:
        done = [rid for rid, st in sorted(self.runs.items())
                if st.get("status") == "completed"]
        return done[-1] if done else None

    def list_runs(self) -> list[dict[str, Any]]:
        return [dict(self.runs[rid]) for rid in sorted(self.runs)]

    # ------------------------------------------------------------ what-if

    def what_if_sync(self, scenario_id: str, patch: dict[str, Any],
                     seed: int = 0, horizon: int = 10) -> dict[str, Any]:
        scenario = self.get_scenario(scenario_id)
        cfg = SimConfig(horizon=horizon, seed=seed,
                        base_tick=self.timeline.max_tick)
        snap = self.timeline.snapshot_at(cfg.base_tick)
        res = what_if(snap, scenario, patch, cfg,
                      cost_model=self.config.cost_model)
        return {
            "base_kpis": res.base_kpis,
            "patched_kpis": res.patched_kpis,
            "delta": res.delta,
            "base_summary": res.base_trace.summary,
            "patched_summary": res.patched_trace.summary,
            "base_unmet_by_customer": res.base_trace.unmet_by_customer(),
            "patched_unmet_by_customer": res.patched_trace.unmet_by_customer(),
        }

    # ------------------------------------------------------------ analytics

    def snapshot_document(self, tick: int | None = None,
                          layer: str | None = None) -> dict[str, Any]:
        snap = self.timeline.snapshot_at(
            tick if tick is not None else self.timeline.max_tick)
        doc = snap.to_dict()
        if layer:
            doc["edges"] = [e for e in doc["edges"] if e["layer"] == layer]
        return doc

    def analytics_centrality(self, measure: str, layer: str | None = None,
                             tick: int | None = None) -> dict[str, Any]:
        snap = self.timeline.snapshot_at(
            tick if tick is not None else self.timeline.max_tick)
        report = centrality(snap, measure,
                            LayerKind(layer) if layer else None)
        return report.to_dict()

    def analytics_communities(self, layer: str | None = None,
                              tick: int | None = None) -> dict[str, Any]:
        snap = self.timeline.snapshot_at(
            tick if tick is not None else self.timeline.max_tick)
        return community_detect(snap,
                                LayerKind(layer) if layer else None).to_dict()

    def analytics_path(self, src: str, dst: str, weight: str = "cost_per_unit",
                       algorithm: str = "dijkstra",
                       tick: int | None = None) -> dict[str, Any]:
        snap = self.timeline.snapshot_at(
            tick if tick is not None else self.timeline.max_tick)
        if algorithm == "dijkstra":
            return shortest_path_dijkstra(snap, src, dst, weight).to_dict()
        if algorithm == "bellman_ford":
            bf = shortest_path_bellman_ford(snap, src, weight)
            return {"src": src, "distances": bf.distances,
                    "negative_cycle": bf.negative_cycle}
        if algorithm == "floyd_warshall":
            fw = all_pairs_floyd_warshall(snap, weight)
            return {"nodes": fw.node_ids,
                    "distance": fw.distance(src, dst),
                    "path": fw.reconstruct(src, dst)}
        raise ChainTwinError(f"unknown algorithm {algorithm!r}")

    def analytics_stress(self, scenario_id: str, candidates: list[str],
                         seed: int = 0, horizon: int = 10) -> dict[str, Any]:
        scenario = self.get_scenario(scenario_id)
        cfg = SimConfig(horizon=horizon, seed=seed,
                        base_tick=self.timeline.max_tick)
        report = critical_rank(self.timeline, scenario, cfg, candidates,
                               self.config.cost_model)
        return report.to_dict()

    # ------------------------------------------------------------ calibration

    def calibration_state(self) -> dict[str, Any]:
        doc = self.feedback.to_dict()
        doc["falsify_report"] = self.feedback.falsify()
        return doc

    def acknowledge_calibration(self, param_id: str) -> bool:
        return self.feedback.acknowledge(param_id)

    # ------------------------------------------------------------ idempotency

    def idempotent(self, key: str | None, body_hash: str):
        """Returns (cached_response | None, conflict: bool)."""
        if not key:
            return None, False
        cached = self._idempotency.get(key)
        if cached is None:
            return None, False
        stored_hash, status, response = cached
        if stored_hash != body_hash:
            return None, True
        return (status, response), False

    def remember(self, key: str | None, body_hash: str, status: int,
                 response: Any) -> None:
        if key:
            self._idempotency[key] = (body_hash, status, response)

    def counters(self) -> dict[str, Any]:
        return {
            "ingest": self.ingestor.counters.to_dict(),
            "timeline": {"deltas": len(self.timeline.deltas),
                         "max_tick": self.timeline.max_tick},
            "alerts": len(self.alerts.all()),
            "runs": len(self.runs),
            "feedback": self.feedback.record_counts(),
        }
