/**
 * KPI tiles and trend charts. Every displayed value is an API field passed
 * through format.ts; nothing is recomputed client-side. Missing windows in
 * a series render as gaps in the polyline, never interpolated.
 */

import { clear, el, svgEl } from "./dom.js";
import { fmtCarbon, fmtFraction, fmtQuantity } from "./format.js";
import type { KpiReportDoc } from "./types.js";

interface TileSpec {
  label: string;
  value: (r: KpiReportDoc) => string;
  field: string;
}

export const TILES: TileSpec[] = [
  { label: "Total cost", value: r => fmtQuantity(r.total_cost),
    field: "total_cost" },
  { label: "Service level", value: r => fmtFraction(r.service_level),
    field: "service_level" },
  { label: "Fill rate", value: r => fmtFraction(r.fill_rate),
    field: "fill_rate" },
  { label: "Lead time (mean)", value: r => fmtQuantity(r.lead_time_mean),
    field: "lead_time_mean" },
  { label: "Carbon", value: r => fmtCarbon(r.carbon_total),
    field: "carbon_total" },
  { label: "Unmet demand", value: r => fmtQuantity(r.unmet_demand),
    field: "unmet_demand" },
  { label: "Shipped units", value: r => fmtQuantity(r.shipped_units),
    field: "shipped_units" },
];

export function renderKpiTiles(container: HTMLElement,
                               report: KpiReportDoc): void {
  clear(container);
  const grid = el("div", { class: "kpi-grid" });
  for (const tile of TILES) {
    grid.append(el("div", { class: "kpi-tile", "data-field": tile.field }, [
      el("div", { class: "kpi-label", text: tile.label }),
      el("div", { class: "kpi-value", text: tile.value(report) }),
    ]));
  }
  const terms = el("div", { class: "kpi-terms" },
    Object.entries(report.cost_terms).map(([term, value]) =>
      el("span", { class: "kpi-term", "data-term": term,
                   text: `${term}: ${fmtQuantity(value)}` })));
  container.append(grid, terms);
}

export function renderKpiTrends(container: HTMLElement,
                                series: (KpiReportDoc | null)[],
                                width = 420, height = 90): void {
  clear(container);
  if (!series.length) {
    container.append(el("div", { class: "empty-state",
                               text: "No KPI windows yet." }));
    return;
  }
  const metrics: { label: string; pick: (r: KpiReportDoc) => number }[] = [
    { label: "cost", pick: r => r.total_cost },
    { label: "service", pick: r => r.service_level },
    { label: "carbon", pick: r => r.carbon_total },
  ];
  for (const metric of metrics) {
    const values = series.map(r => (r === null ? null : metric.pick(r)));
    const present = values.filter((v): v is number => v !== null);
    const max = present.length ? Math.max(...present, 1e-9) : 1;
    const svg = svgEl("svg", {
      class: "kpi-trend", viewBox: `0 0 ${width} ${height}`,
      "data-metric": metric.label,
    });
    // gaps split the line into segments rather than interpolating across
    let segment: string[] = [];
    const flush = () => {
      if (segment.length >= 2) {
        svg.append(svgEl("polyline", {
          points: segment.join(" "), fill: "none",
          stroke: "#3d6fae", "stroke-width": "2",
        }));
      } else if (segment.length === 1) {
        const [x, y] = segment[0].split(",").map(Number);
        svg.append(svgEl("circle",
          { cx: String(x), cy: String(y), r: "2.5", fill: "#3d6fae" }));
      }
      segment = [];
    };
    values.forEach((v, i) => {
      if (v === null) {
        flush();
        return;
      }
      const x = 10 + (i * (width - 20)) / Math.max(1, values.length - 1);
      const y = height - 12 - (v / max) * (height - 24);
      segment.push(`${x},${y}`);
    });
    flush();
    const caption = el("div", { class: "trend-caption", text: metric.label });
    container.append(caption, svg);
  }
}
