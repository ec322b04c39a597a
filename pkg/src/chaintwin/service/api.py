"""HTTP API over the engine.

Stable JSON documents, machine-readable error codes, pagination on list
endpoints, idempotency keys on mutating endpoints, and a server-push alert
stream with a monotone cursor so clients resume without loss.

Error mapping: 400 malformed request, 404 unknown id, 409 idempotency
conflict, 422 invariant violation (the violated bound is named in the
message), 503 intake queue full.
"""

from __future__ import annotations

import asyncio
import hashlib
import json
from typing import Any

from fastapi import Depends, FastAPI, Header, HTTPException, Request
from fastapi.responses import JSONResponse, StreamingResponse

from ..errors import (
    ChainTwinError,
    DuplicateId,
    DuplicateOpenPrediction,
    EmptyGraph,
    EmptyMaterialLayer,
    InvalidAttribute,
    InvalidWeight,
    NegativeWeightPresent,
    QueueFull,
    UnknownMeasure,
    UnknownNode,
    UnknownSubject,
    WindowOutOfRange,
)
from .engine import EngineHandle

_STATUS_BY_ERROR: list[tuple[type, int]] = [
    (QueueFull, 503),
    (UnknownNode, 404),
    (UnknownSubject, 404),
    (DuplicateId, 422),
    (DuplicateOpenPrediction, 422),
    (InvalidAttribute, 422),
    (InvalidWeight, 422),
    (UnknownMeasure, 400),
    (NegativeWeightPresent, 400),
    (EmptyGraph, 422),
    (EmptyMaterialLayer, 422),
    (WindowOutOfRange, 400),
]


def _http_status(exc: ChainTwinError) -> int:
    for klass, status in _STATUS_BY_ERROR:
        if isinstance(exc, klass):
            return status
    return 400


def create_app(handle: EngineHandle) -> FastAPI:
    app = FastAPI(title="chaintwin", version="0.1.0")

    def check_token(authorization: str | None = Header(default=None)) -> None:
        token = handle.config.api_token
        if not token:
            return
        if authorization != f"Bearer {token}":
            raise HTTPException(status_code=401, detail={
                "code": "unauthorized", "message": "missing or bad token"})

    guarded = Depends(check_token)

    @app.exception_handler(ChainTwinError)
    async def engine_error_handler(request: Request, exc: ChainTwinError):
        return JSONResponse(
            status_code=_http_status(exc),
            content={"code": exc.code, "message": str(exc), "detail": None})

    async def idempotent_post(request: Request, compute,
                              idempotency_key: str | None):
        body = await request.body()
        body_hash = hashlib.sha256(body).hexdigest()
        cached, conflict = handle.idempotent(idempotency_key, body_hash)
        if conflict:
            return JSONResponse(status_code=409, content={
                "code": "idempotency_conflict",
                "message": "key re-used with a different payload",
                "detail": idempotency_key})
        if cached is not None:
            status, response = cached
            return JSONResponse(status_code=status, content=response)
        status, response = compute()
        handle.remember(idempotency_key, body_hash, status, response)
        return JSONResponse(status_code=status, content=response)

    # ------------------------------------------------------------ reads

    @app.get("/health")
    def health():
        return {"status": "ok", "data_dir": str(handle.data_dir)}

    @app.get("/counters", dependencies=[guarded])
    def counters():
        return handle.counters()

    @app.get("/snapshot", dependencies=[guarded])
    def snapshot(tick: int | None = None, layer: str | None = None):
        return handle.snapshot_document(tick, layer)

    @app.get("/kpis", dependencies=[guarded])
    def kpis(run: str | None = None,
             window_from: int | None = None, window_to: int | None = None,
             stride: int | None = None):
        run_id = run or handle.latest_completed_run()
        if run_id is None:
            raise UnknownNode("no completed runs to report on")
        trace = handle.run_trace(run_id)
        snap = handle.timeline.snapshot_at(handle.timeline.max_tick)
        from ..kpi.reports import compute_kpis, kpi_series
        if stride:
            series = kpi_series(trace, snap, handle.config.cost_model, stride)
            return {"run": run_id, "series": [r.to_dict() for r in series]}
        window = None
        if window_from is not None or window_to is not None:
            window = (window_from or 0, window_to
                      if window_to is not None else trace.horizon)
        report = compute_kpis(trace, snap, handle.config.cost_model, window)
        return {"run": run_id, "report": report.to_dict()}

    @app.get("/alerts", dependencies=[guarded])
    def alerts(since: int = 0, limit: int = 100):
        items, next_cursor = handle.alerts.since(since, limit)
        return {"alerts": [a.to_dict() for a in items],
                "next_cursor": next_cursor}

    @app.get("/alerts/stream", dependencies=[guarded])
    async def alert_stream(request: Request, since: int = 0,
                           limit: int | None = None):
        async def event_source():
            cursor = since
            sent = 0
            while True:
                items, cursor = handle.alerts.since(cursor)
                for alert in items:
                    payload = json.dumps(alert.to_dict(), sort_keys=True)
                    yield f"id: {alert.id}\ndata: {payload}\n\n"
                    sent += 1
                    if limit is not None and sent >= limit:
                        return
                if await request.is_disconnected():
                    return
                await asyncio.sleep(0.2)

        return StreamingResponse(event_source(), media_type="text/event-stream")

    # ------------------------------------------------------------ mutations

    @app.post("/events", dependencies=[guarded], status_code=202)
    async def post_events(request: Request,
                          idempotency_key: str | None = Header(default=None)):
        payload = await request.json()
        if not isinstance(payload, dict) or "lines" not in payload:
            raise HTTPException(status_code=400, detail={
                "code": "malformed", "message": "expected {source, lines}"})
        source = payload.get("source", "iot")
        lines = payload["lines"]

        def compute():
            counts = handle.ingest_lines(lines, source)
            return 202, counts

        return await idempotent_post(request, compute, idempotency_key)

    @app.post("/alerts/{alert_id}/ack", dependencies=[guarded])
    def ack_alert(alert_id: int):
        alert = handle.alerts.acknowledge(alert_id)
        if alert is None:
            raise UnknownNode(f"alert {alert_id} unknown")
        return alert.to_dict()

    @app.post("/scenarios", dependencies=[guarded], status_code=201)
    async def post_scenario(request: Request,
                            idempotency_key: str | None = Header(default=None)):
        document = await request.json()

        def compute():
            scenario_id = handle.register_scenario(document)
            return 201, {"id": scenario_id}

        return await idempotent_post(request, compute, idempotency_key)

    @app.get("/scenarios", dependencies=[guarded])
    def scenarios(limit: int = 100, offset: int = 0):
        names = handle.list_scenarios()
        return {"scenarios": names[offset:offset + limit], "total": len(names)}

    @app.post("/runs", dependencies=[guarded], status_code=202)
    async def post_run(request: Request,
                       idempotency_key: str | None = Header(default=None)):
        payload = await request.json()

        def compute():
            run_id = handle.start_run(
                scenario_id=payload["scenario"],
                mode=payload.get("mode", "simulate"),
                seed=int(payload.get("seed", 0)),
                horizon=int(payload.get("horizon", 10)))
            return 202, {"run_id": run_id}

        return await idempotent_post(request, compute, idempotency_key)

    @app.get("/runs", dependencies=[guarded])
    def runs(limit: int = 100, offset: int = 0):
        items = handle.list_runs()
        return {"runs": items[offset:offset + limit], "total": len(items)}

    @app.get("/runs/{run_id}", dependencies=[guarded])
    def run_status(run_id: str):
        status = handle.get_run(run_id)
        status["kpis"] = handle.run_kpis(run_id)
        return status

    @app.post("/whatif", dependencies=[guarded])
    async def whatif(request: Request,
                     idempotency_key: str | None = Header(default=None)):
        payload = await request.json()

        def compute():
            result = handle.what_if_sync(
                scenario_id=payload["scenario"],
                patch=payload.get("patch", {}),
                seed=int(payload.get("seed", 0)),
                horizon=int(payload.get("horizon", 10)))
            return 200, result

        return await idempotent_post(request, compute, idempotency_key)

    # ------------------------------------------------------------ analytics

    @app.get("/analytics/centrality", dependencies=[guarded])
    def analytics_centrality(measure: str = "betweenness",
                             layer: str | None = None,
                             tick: int | None = None):
        return handle.analytics_centrality(measure, layer, tick)

    @app.get("/analytics/communities", dependencies=[guarded])
    def analytics_communities(layer: str | None = None,
                              tick: int | None = None):
        return handle.analytics_communities(layer, tick)

    @app.get("/analytics/paths", dependencies=[guarded])
    def analytics_paths(src: str, dst: str, weight: str = "cost_per_unit",
                        algorithm: str = "dijkstra", tick: int | None = None):
        return handle.analytics_path(src, dst, weight, algorithm, tick)

    @app.get("/analytics/stress", dependencies=[guarded])
    def analytics_stress(scenario: str, candidates: str, seed: int = 0,
                         horizon: int = 10):
        ids = [c for c in candidates.split(",") if c]
        return handle.analytics_stress(scenario, ids, seed, horizon)

    # ------------------------------------------------------------ calibration

    @app.get("/calibration", dependencies=[guarded])
    def calibration():
        return handle.calibration_state()

    @app.post("/calibration/{param_id}/ack", dependencies=[guarded])
    def ack_calibration(param_id: str):
        if not handle.acknowledge_calibration(param_id):
            raise UnknownNode(f"parameter {param_id!r} not falsified")
        return {"acknowledged": param_id}

    return app


def serve(config_path: str | None = None, host: str | None = None,
          port: int | None = None) -> None:
    """Run the service until interrupted."""
    import uvicorn

    from .config import EngineConfig

    config = EngineConfig.load(config_path)
    handle = EngineHandle(config)
    handle.ingestor.start()
    app = create_app(handle)
    try:
        uvicorn.run(app, host=host or config.bind_host,
                    port=port or config.bind_port, log_level="warning")
    finally:
        handle.close()
