"""Engine configuration: one YAML file, two env-var overrides.

Only the data directory and bind address can come from the environment
(CHAINTWIN_DATA_DIR, CHAINTWIN_BIND); everything else lives in the file.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from ..ingest.alerts import AlertRule, DEFAULT_RULES
from ..sim.cost import CostModel


@dataclass
class EngineConfig:
    data_dir: Path = Path("twin-data")
    bind_host: str = "127.0.0.1"
    bind_port: int = 8787
    api_token: str | None = None
    queue_bound: int = 10_000
    lateness_window: int = 10
    alpha: float = 0.3
    alpha_per_measure: dict[str, float] = field(default_factory=dict)
    falsify_threshold: float = 0.6
    falsify_min_samples: int = 5
    alert_rules: list[AlertRule] = field(default_factory=lambda: list(DEFAULT_RULES))
    tolerances: dict[str, tuple[str, float]] = field(default_factory=dict)
    cost_model: CostModel = field(default_factory=CostModel)
    whatif_latency_budget_s: float = 10.0
    sync_horizon_limit: int = 10_000

    def to_dict(self) -> dict[str, Any]:
        return {
            "data_dir": str(self.data_dir),
            "bind_host": self.bind_host,
            "bind_port": self.bind_port,
            "api_token": self.api_token,
            "queue_bound": self.queue_bound,
            "lateness_window": self.lateness_window,
            "alpha": self.alpha,
            "alpha_per_measure": dict(sorted(self.alpha_per_measure.items())),
            "falsify_threshold": self.falsify_threshold,
            "falsify_min_samples": self.falsify_min_samples,
            "alert_rules": [r.to_dict() for r in self.alert_rules],
            "tolerances": {k: list(v) for k, v in sorted(self.tolerances.items())},
            "cost_model": self.cost_model.to_dict(),
            "whatif_latency_budget_s": self.whatif_latency_budget_s,
            "sync_horizon_limit": self.sync_horizon_limit,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "EngineConfig":
        cfg = cls()
        if "data_dir" in d:
            cfg.data_dir = Path(d["data_dir"])
        cfg.bind_host = d.get("bind_host", cfg.bind_host)
        cfg.bind_port = int(d.get("bind_port", cfg.bind_port))
        cfg.api_token = d.get("api_token")
        cfg.queue_bound = int(d.get("queue_bound", cfg.queue_bound))
        cfg.lateness_window = int(d.get("lateness_window", cfg.lateness_window))
        cfg.alpha = float(d.get("alpha", cfg.alpha))
        cfg.alpha_per_measure = {k: float(v) for k, v in
                                 (d.get("alpha_per_measure") or {}).items()}
        cfg.falsify_threshold = float(d.get("falsify_threshold",
                                            cfg.falsify_threshold))
        cfg.falsify_min_samples = int(d.get("falsify_min_samples",
                                            cfg.falsify_min_samples))
        if "alert_rules" in d:
            cfg.alert_rules = [AlertRule.from_dict(r) for r in d["alert_rules"]]
        cfg.tolerances = {k: (v[0], float(v[1]))
                          for k, v in (d.get("tolerances") or {}).items()}
        if "cost_model" in d:
            cfg.cost_model = CostModel.from_dict(d["cost_model"])
        cfg.whatif_latency_budget_s = float(
            d.get("whatif_latency_budget_s", cfg.whatif_latency_budget_s))
        cfg.sync_horizon_limit = int(
            d.get("sync_horizon_limit", cfg.sync_horizon_limit))
        return cfg

    @classmethod
    def load(cls, path: str | Path | None = None) -> "EngineConfig":
        d: dict[str, Any] = {}
        if path is not None and Path(path).exists():
            with open(path, encoding="utf-8") as fh:
                d = yaml.safe_load(fh) or {}
        cfg = cls.from_dict(d)
        env_dir = os.environ.get("CHAINTWIN_DATA_DIR")
        if env_dir:
            cfg.data_dir = Path(env_dir)
        env_bind = os.environ.get("CHAINTWIN_BIND")
        if env_bind:
            host, _, port = env_bind.partition(":")
            cfg.bind_host = host or cfg.bind_host
            if port:
                cfg.bind_port = int(port)
        return cfg

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            yaml.safe_dump(self.to_dict(), fh, sort_keys=True)
