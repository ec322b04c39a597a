/**
 * Typed client for the twin service. All console mutations flow through
 * here; when no write token is granted the client refuses mutating calls,
 * which keeps the whole console read-only.
 */

import type {
  AlertDoc,
  AlertPage,
  CentralityDoc,
  KpiReportDoc,
  RunStatusDoc,
  SnapshotDoc,
  StressDoc,
  WhatIfPatch,
  WhatIfResponse,
} from "./types.js";

export interface ApiConfig {
  baseUrl: string;
  token?: string;
  writeEnabled: boolean;
  fetchImpl?: typeof fetch;
}

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}

export class TwinApi {
  private fetchImpl: typeof fetch;

  constructor(public config: ApiConfig) {
    this.fetchImpl = config.fetchImpl ?? fetch;
  }

  private headers(): Record<string, string> {
    const h: Record<string, string> = { "Content-Type": "application/json" };
    if (this.config.token) h["Authorization"] = `Bearer ${this.config.token}`;
    return h;
  }

  private async request<T>(method: string, path: string, body?: unknown,
                           idempotencyKey?: string): Promise<T> {
    if (method !== "GET" && !this.config.writeEnabled) {
      throw new ApiError(403, "read_only",
        "console is read-only: no write scope granted");
    }
    const headers = this.headers();
    if (idempotencyKey) headers["Idempotency-Key"] = idempotencyKey;
    const res = await this.fetchImpl(this.config.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await res.json().catch(() => ({}));
    if (!res.ok) {
      throw new ApiError(res.status, payload.code ?? "error",
        payload.message ?? `HTTP ${res.status}`);
    }
    return payload as T;
  }

  snapshot(tick?: number, layer?: string): Promise<SnapshotDoc> {
    const params = new URLSearchParams();
    if (tick !== undefined) params.set("tick", String(tick));
    if (layer) params.set("layer", layer);
    const qs = params.toString();
    return this.request("GET", `/snapshot${qs ? `?${qs}` : ""}`);
  }

  kpis(run?: string): Promise<{ run: string; report: KpiReportDoc }> {
    const qs = run ? `?run=${encodeURIComponent(run)}` : "";
    return this.request("GET", `/kpis${qs}`);
  }

  kpiSeries(run: string, stride: number
            ): Promise<{ run: string; series: KpiReportDoc[] }> {
    return this.request(
      "GET", `/kpis?run=${encodeURIComponent(run)}&stride=${stride}`);
  }

  alerts(since = 0, limit = 200): Promise<AlertPage> {
    return this.request("GET", `/alerts?since=${since}&limit=${limit}`);
  }

  ackAlert(id: number): Promise<AlertDoc> {
    return this.request("POST", `/alerts/${id}/ack`);
  }

  registerScenario(document: Record<string, unknown>,
                   idempotencyKey?: string): Promise<{ id: string }> {
    return this.request("POST", "/scenarios", document, idempotencyKey);
  }

  listScenarios(): Promise<{ scenarios: string[]; total: number }> {
    return this.request("GET", "/scenarios");
  }

  startRun(scenario: string, mode: string, seed: number, horizon: number
           ): Promise<{ run_id: string }> {
    return this.request("POST", "/runs", { scenario, mode, seed, horizon });
  }

  runStatus(runId: string): Promise<RunStatusDoc> {
    return this.request("GET", `/runs/${encodeURIComponent(runId)}`);
  }

  whatIf(scenario: string, patch: WhatIfPatch, seed: number, horizon: number
         ): Promise<WhatIfResponse> {
    return this.request("POST", "/whatif", { scenario, patch, seed, horizon });
  }

  centrality(measure: string): Promise<CentralityDoc> {
    return this.request("GET",
      `/analytics/centrality?measure=${encodeURIComponent(measure)}`);
  }

  stress(scenario: string, candidates: string[], seed: number,
         horizon: number): Promise<StressDoc> {
    const list = encodeURIComponent(candidates.join(","));
    return this.request("GET",
      `/analytics/stress?scenario=${encodeURIComponent(scenario)}` +
      `&candidates=${list}&seed=${seed}&horizon=${horizon}`);
  }

  streamUrl(since: number): string {
    return `${this.config.baseUrl}/alerts/stream?since=${since}`;
  }

  rawFetch(): typeof fetch {
    return this.fetchImpl;
  }
}
