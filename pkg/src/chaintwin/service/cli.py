"""Command-line interface for batch workflows.

Subcommands: init, load-graph, ingest, simulate, optimize, whatif, analyze,
report, serve. All randomness is controlled by an explicit --seed; given
identical inputs and seeds, output files are byte-identical. Exit codes:
0 success, 1 validation/usage failure, 2 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import yaml

from ..errors import ChainTwinError
from ..graph.bootstrap import load_graph_tables
from ..graph.timeline import GraphTimeline
from ..kpi.reports import compute_kpis, kpi_series
from ..plan.planner import FlowPlan, plan_flows, validate_plan
from ..sim.engine import FixedPlanPolicy, GreedyPolicy, SimTrace, run as sim_run
from ..sim.scenario import Scenario, SimConfig
from ..sim.whatif import what_if
from .config import EngineConfig
from .engine import EngineHandle


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def _load_config(args) -> EngineConfig:
    config_path = getattr(args, "config", None)
    if config_path is None and args.data_dir:
        candidate = Path(args.data_dir) / "config.yaml"
        config_path = candidate if candidate.exists() else None
    config = EngineConfig.load(config_path)
    if args.data_dir:
        config.data_dir = Path(args.data_dir)
    return config


def _timeline(args) -> GraphTimeline:
    return GraphTimeline.load(Path(args.data_dir) / "deltas.log")


def _export_trace(trace: SimTrace, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "states.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["tick", "node", "inventory", "backlog", "throughput_used"])
        for t, state in enumerate(trace.states):
            for nid in sorted(state):
                sv = state[nid]
                w.writerow([t, nid, sv.inventory, sv.backlog, sv.throughput_used])
    with open(out_dir / "flows.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["tick", "edge", "src", "dst", "quantity", "unit_cost",
                    "unit_carbon", "capacity", "arrival_tick"])
        for per_tick in trace.flows:
            for fl in per_tick:
                w.writerow([fl.tick, fl.edge_id, fl.src, fl.dst, fl.quantity,
                            fl.unit_cost, fl.unit_carbon, fl.capacity,
                            fl.arrival_tick])
    _write_json(out_dir / "trace.json", trace.to_dict())
    _write_json(out_dir / "summary.json", trace.summary)


def cmd_init(args) -> int:
    data_dir = Path(args.data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    (data_dir / "scenarios").mkdir(exist_ok=True)
    (data_dir / "runs").mkdir(exist_ok=True)
    config = EngineConfig.load(None)
    config.data_dir = data_dir
    config.save(data_dir / "config.yaml")
    print(f"initialized data dir at {data_dir}")
    return 0


def cmd_load_graph(args) -> int:
    config = _load_config(args)
    with EngineHandle(config) as handle:
        n_nodes, n_edges = load_graph_tables(
            handle.timeline, args.nodes, args.edges, tick=args.tick)
    print(f"loaded {n_nodes} nodes, {n_edges} edges at tick {args.tick}")
    return 0


def cmd_ingest(args) -> int:
    config = _load_config(args)
    lines = Path(args.file).read_text(encoding="utf-8").splitlines()
    with EngineHandle(config) as handle:
        counts = handle.ingest_lines(lines, args.source)
        print(json.dumps({**counts,
                          "counters": handle.ingestor.counters.to_dict()},
                         sort_keys=True, indent=2))
    return 0


def cmd_simulate(args) -> int:
    timeline = _timeline(args)
    scenario = Scenario.from_yaml(args.scenario)
    cfg = SimConfig(horizon=args.horizon, seed=args.seed,
                    base_tick=args.base_tick if args.base_tick is not None
                    else timeline.max_tick)
    if args.plan:
        policy = FlowPlan.load(args.plan).policy()
    else:
        policy = GreedyPolicy(lookahead=args.lookahead)
    trace = sim_run(timeline, scenario, cfg, policy)
    out_dir = Path(args.out)
    _export_trace(trace, out_dir)
    config = _load_config(args)
    snap = timeline.snapshot_at(cfg.base_tick)
    kpis = compute_kpis(trace, snap, config.cost_model)
    _write_json(out_dir / "kpis.json", kpis.to_dict())
    print(f"simulated {args.horizon} ticks (seed {args.seed}) -> {out_dir}")
    print(f"unmet demand: {trace.summary['unmet_demand']}, "
          f"total cost: {kpis.total_cost:g}")
    return 0


def cmd_optimize(args) -> int:
    timeline = _timeline(args)
    scenario = Scenario.from_yaml(args.scenario)
    config = _load_config(args)
    cfg = SimConfig(horizon=args.horizon, seed=args.seed,
                    base_tick=args.base_tick if args.base_tick is not None
                    else timeline.max_tick)
    plan = plan_flows(timeline, scenario, cfg, config.cost_model)
    plan.save(args.out)
    print(f"planned cost: {plan.planned_cost:g} "
          f"({plan.flow_count()} flow assignments) -> {args.out}")
    return 0


def cmd_whatif(args) -> int:
    timeline = _timeline(args)
    scenario = Scenario.from_yaml(args.scenario)
    with open(args.patch, encoding="utf-8") as fh:
        patch = yaml.safe_load(fh) or {}
    config = _load_config(args)
    cfg = SimConfig(horizon=args.horizon, seed=args.seed,
                    base_tick=args.base_tick if args.base_tick is not None
                    else timeline.max_tick)
    res = what_if(timeline, scenario, patch, cfg, cost_model=config.cost_model)
    report = {"base": res.base_kpis, "patched": res.patched_kpis,
              "delta": res.delta}
    _write_json(Path(args.out), report)
    print(f"what-if delta total_cost: {res.delta['total_cost']:g}, "
          f"unmet demand: {res.delta['unmet_demand']}")
    return 0


def cmd_analyze(args) -> int:
    timeline = _timeline(args)
    tick = args.tick if args.tick is not None else timeline.max_tick
    snap = timeline.snapshot_at(tick)
    from ..analysis import (
        all_pairs_floyd_warshall,
        centrality,
        community_detect,
        critical_rank,
        shortest_path_bellman_ford,
        shortest_path_dijkstra,
    )
    from ..graph.types import LayerKind

    layer = LayerKind(args.layer) if getattr(args, "layer", None) else None
    if args.what == "centrality":
        payload = centrality(snap, args.measure, layer).to_dict()
    elif args.what == "communities":
        payload = community_detect(snap, layer).to_dict()
    elif args.what == "paths":
        if args.algorithm == "dijkstra":
            payload = shortest_path_dijkstra(snap, args.src, args.dst,
                                             args.weight).to_dict()
        elif args.algorithm == "bellman_ford":
            bf = shortest_path_bellman_ford(snap, args.src, args.weight)
            payload = {"src": args.src, "distances": bf.distances,
                       "negative_cycle": bf.negative_cycle}
        else:
            fw = all_pairs_floyd_warshall(snap, args.weight)
            payload = {"nodes": fw.node_ids,
                       "distance": fw.distance(args.src, args.dst),
                       "path": fw.reconstruct(args.src, args.dst)}
    elif args.what == "stress":
        scenario = Scenario.from_yaml(args.scenario)
        config = _load_config(args)
        cfg = SimConfig(horizon=args.horizon, seed=args.seed, base_tick=tick)
        candidates = args.candidates.split(",") if args.candidates else (
            snap.node_ids() + sorted(snap.edges))
        payload = critical_rank(timeline, scenario, cfg, candidates,
                                config.cost_model).to_dict()
    else:
        raise ChainTwinError(f"unknown analysis {args.what!r}")
    if args.out:
        _write_json(Path(args.out), payload)
        print(f"{args.what} -> {args.out}")
    else:
        print(json.dumps(payload, sort_keys=True, indent=2))
    if args.csv:
        _analysis_csv(args.what, payload, Path(args.csv))
    return 0


def _analysis_csv(what: str, payload: dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if what == "centrality":
            w.writerow(["node", "score", "rank"])
            rank = {nid: i + 1 for i, nid in enumerate(payload["ranking"])}
            for nid in sorted(payload["scores"]):
                w.writerow([nid, payload["scores"][nid], rank[nid]])
        elif what == "communities":
            w.writerow(["node", "community"])
            for nid, comm in sorted(payload["partition"].items()):
                w.writerow([nid, comm])
        elif what == "stress":
            w.writerow(["element_id", "delta_unmet_demand", "delta_cost",
                        "disconnected_customers"])
            for row in payload["rows"]:
                w.writerow([row["element_id"], row["delta_unmet_demand"],
                            row["delta_cost"], row["disconnected_customers"]])
        else:  # paths
            w.writerow(["field", "value"])
            for key in sorted(payload):
                w.writerow([key, json.dumps(payload[key], sort_keys=True)])


def cmd_report(args) -> int:
    trace = SimTrace.from_dict(
        json.loads(Path(args.trace).read_text(encoding="utf-8")))
    timeline = _timeline(args)
    snap = timeline.snapshot_at(args.tick if args.tick is not None
                                else timeline.max_tick)
    config = _load_config(args)
    if args.stride:
        series = kpi_series(trace, snap, config.cost_model, args.stride)
        payload = {"series": [r.to_dict() for r in series]}
    else:
        window = None
        if args.window_from is not None or args.window_to is not None:
            window = (args.window_from or 0,
                      args.window_to if args.window_to is not None
                      else trace.horizon)
        payload = {"report": compute_kpis(trace, snap, config.cost_model,
                                          window).to_dict()}
    _write_json(Path(args.out), payload)
    if args.csv:
        reports = (payload.get("series")
                   or [payload["report"]])
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["window_from", "window_to", "total_cost",
                        "service_level", "fill_rate", "lead_time_mean",
                        "carbon_total", "shipped_units", "unmet_demand"])
            for r in reports:
                w.writerow([r["window"][0], r["window"][1], r["total_cost"],
                            r["service_level"], r["fill_rate"],
                            r["lead_time_mean"], r["carbon_total"],
                            r["shipped_units"], r["unmet_demand"]])
    print(f"report -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    from .api import serve
    config_path = args.config or (Path(args.data_dir) / "config.yaml"
                                  if args.data_dir else None)
    serve(config_path, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chaintwin",
        description="Graph-based supply-chain digital twin engine.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, data_dir_required=True):
        p.add_argument("--data-dir", required=data_dir_required,
                       help="engine data directory")
        p.add_argument("--config", default=None, help="config file override")

    p = sub.add_parser("init", help="initialize a data directory")
    add_common(p)
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("load-graph", help="load node/edge bootstrap tables")
    add_common(p)
    p.add_argument("--nodes", required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--tick", type=int, default=0)
    p.set_defaults(func=cmd_load_graph)

    p = sub.add_parser("ingest", help="ingest an event file")
    add_common(p)
    p.add_argument("--file", required=True)
    p.add_argument("--source", default="iot",
                   choices=["iot", "erp", "logistics", "public"])
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("simulate", help="run a scenario")
    add_common(p)
    p.add_argument("--scenario", required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--plan", default=None, help="execute a saved plan")
    p.add_argument("--lookahead", type=int, default=0)
    p.add_argument("--base-tick", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", help="plan flows for a scenario")
    add_common(p)
    p.add_argument("--scenario", required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--base-tick", type=int, default=None)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("whatif", help="base vs patched scenario delta")
    add_common(p)
    p.add_argument("--scenario", required=True)
    p.add_argument("--patch", required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--base-tick", type=int, default=None)
    p.set_defaults(func=cmd_whatif)

    p = sub.add_parser("analyze", help="structural analytics")
    add_common(p)
    p.add_argument("what", choices=["centrality", "communities", "paths",
                                    "stress"])
    p.add_argument("--measure", default="betweenness",
                   choices=["degree", "betweenness", "closeness"])
    p.add_argument("--layer", default=None)
    p.add_argument("--tick", type=int, default=None)
    p.add_argument("--src")
    p.add_argument("--dst")
    p.add_argument("--weight", default="cost_per_unit")
    p.add_argument("--algorithm", default="dijkstra",
                   choices=["dijkstra", "bellman_ford", "floyd_warshall"])
    p.add_argument("--scenario")
    p.add_argument("--candidates", default=None)
    p.add_argument("--horizon", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--csv", default=None, help="also write a tabular export")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("report", help="KPI report from an exported trace")
    add_common(p)
    p.add_argument("--trace", required=True, help="trace.json from simulate")
    p.add_argument("--window-from", type=int, default=None)
    p.add_argument("--window-to", type=int, default=None)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--tick", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="run the HTTP service")
    add_common(p, data_dir_required=False)
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ChainTwinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # internal failure
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
