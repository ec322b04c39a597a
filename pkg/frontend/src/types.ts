/**
 * API payload types, mirroring the service's documented field schemas.
 * The console performs no domain computation: every rendered number is one
 * of these fields passed through a formatter from format.ts.
 */

export type EntityKind =
  | "supplier" | "manufacturer" | "warehouse" | "distributor" | "customer";
export type LayerKind = "material" | "information" | "financial";
export type Severity = "info" | "warning" | "critical";

export interface StateVector {
  inventory: number;
  backlog: number;
  throughput_used: number;
  custom: Record<string, number>;
}

export interface NodeDoc {
  id: string;
  kind: EntityKind;
  label: string;
  state: StateVector;
  attrs: Record<string, number>;
  location: [number, number] | null;
}

export interface WeightsDoc {
  cost_per_unit: number;
  transit_time: number;
  capacity: number;
  reliability: number;
  carbon_per_unit: number;
}

export interface EdgeDoc {
  id: string;
  src: string;
  dst: string;
  layer: LayerKind;
  weights: WeightsDoc;
  valid_from: number;
  valid_until: number | null;
}

export interface SnapshotDoc {
  tick: number;
  nodes: NodeDoc[];
  edges: EdgeDoc[];
}

export interface KpiReportDoc {
  window: [number, number];
  total_cost: number;
  cost_terms: Record<string, number>;
  demand_requested: number;
  demand_on_time: number;
  demand_late: number;
  demand_lost: number;
  service_level: number;
  fill_rate: number;
  lead_time_mean: number;
  lead_time_p50: number;
  lead_time_p90: number;
  lead_time_max: number;
  inventory_by_kind: Record<string, { mean: number; min: number; max: number }>;
  carbon_total: number;
  carbon_transport: number;
  carbon_production: number;
  carbon_by_element: Record<string, number>;
  utilization: Record<string, number>;
  shipped_units: number;
  unmet_demand: number;
}

export interface AlertDoc {
  id: number;
  tick: number;
  severity: Severity;
  subject: string;
  rule: string;
  message: string;
  acknowledged: boolean;
  imputed: boolean;
}

export interface AlertPage {
  alerts: AlertDoc[];
  next_cursor: number;
}

export interface RunStatusDoc {
  run_id: string;
  status: "pending" | "running" | "completed" | "failed";
  mode: string;
  scenario: string;
  seed: number;
  horizon: number;
  summary?: Record<string, number>;
  planned_cost?: number | null;
  kpis?: KpiReportDoc | null;
  error?: string;
}

export interface WhatIfResponse {
  base_kpis: KpiReportDoc;
  patched_kpis: KpiReportDoc;
  delta: Record<string, unknown>;
  base_summary: Record<string, number>;
  patched_summary: Record<string, number>;
  base_unmet_by_customer: Record<string, number>;
  patched_unmet_by_customer: Record<string, number>;
}

export interface CentralityDoc {
  measure: string;
  scores: Record<string, number>;
  ranking: string[];
}

export interface StressRowDoc {
  element_id: string;
  delta_unmet_demand: number;
  delta_cost: number;
  disconnected_customers: number;
}

export interface StressDoc {
  baseline_unmet: number;
  baseline_cost: number;
  rows: StressRowDoc[];
}

export interface DisturbancePatch {
  target: string;
  kind: "node_outage" | "edge_outage" | "capacity_scale" | "edge_noise" | "node_noise";
  start: number;
  end: number | null;
  magnitude?: number;
}

export interface WhatIfPatch {
  add_disturbances: DisturbancePatch[];
  demand_edits?: Record<string, Record<string, number>>;
  supply_edits?: Record<string, Record<string, number>>;
  name?: string;
}
