/**
 * What-if builder: compose a disturbance patch from selected elements,
 * submit it, and render the base-vs-patched KPI delta side by side. A patch
 * the operator likes can be promoted to a registered scenario in one click.
 * API validation failures surface inline on the offending entry.
 */

import { clear, el } from "./dom.js";
import { fmtFraction, fmtQuantity, fmtSigned } from "./format.js";
import type { TwinApi } from "./api.js";
import type { ViewState } from "./state.js";
import type { DisturbancePatch, KpiReportDoc, WhatIfResponse } from "./types.js";

export interface WhatIfOutcome {
  response: WhatIfResponse;
  impactedCustomers: string[];
}

export class WhatIfBuilder {
  lastOutcome: WhatIfOutcome | null = null;

  constructor(private api: TwinApi, private view: ViewState,
              private patchContainer: HTMLElement,
              private resultContainer: HTMLElement) {}

  addOutage(target: string, isEdge: boolean, start: number,
            end: number | null): void {
    this.view.pendingPatch.push({
      target, kind: isEdge ? "edge_outage" : "node_outage", start, end,
    });
    this.renderPatch();
  }

  addCapacityScale(target: string, magnitude: number, start: number,
                   end: number | null): void {
    this.view.pendingPatch.push({
      target, kind: "capacity_scale", start, end, magnitude,
    });
    this.renderPatch();
  }

  removeEntry(index: number): void {
    this.view.pendingPatch.splice(index, 1);
    this.renderPatch();
  }

  renderPatch(errorAt?: number, errorMessage?: string): void {
    clear(this.patchContainer);
    if (!this.view.pendingPatch.length) {
      this.patchContainer.append(el("div", {
        class: "empty-state",
        text: "Select a node or lane in the graph to add an outage, "
          + "or submit as-is for a baseline re-run.",
      }));
      return;
    }
    this.view.pendingPatch.forEach((entry, index) => {
      const range = entry.end === null
        ? `t${entry.start}..end` : `t${entry.start}..${entry.end}`;
      const magnitude = entry.kind === "capacity_scale"
        ? ` x${fmtQuantity(entry.magnitude ?? 0)}` : "";
      const row = el("div", { class: "patch-entry", "data-index": String(index) }, [
        el("span", { text: `${entry.kind} ${entry.target} ${range}${magnitude}` }),
      ]);
      const remove = el("button", { class: "remove-entry", text: "remove" });
      remove.addEventListener("click", () => this.removeEntry(index));
      row.append(remove);
      if (errorAt === index && errorMessage) {
        row.append(el("div", { class: "patch-error", text: errorMessage }));
      }
      this.patchContainer.append(row);
    });
  }

  async submit(): Promise<WhatIfOutcome> {
    if (!this.view.scenarioId) {
      throw new Error("no base scenario selected");
    }
    let response: WhatIfResponse;
    try {
      response = await this.api.whatIf(
        this.view.scenarioId,
        { add_disturbances: this.view.pendingPatch },
        this.view.seed, this.view.horizon);
    } catch (err) {
      this.renderPatch(this.view.pendingPatch.length - 1, String(err));
      throw err;
    }
    const impacted = impactedCustomers(response);
    this.lastOutcome = { response, impactedCustomers: impacted };
    this.renderResult(response, impacted);
    return this.lastOutcome;
  }

  async promote(name: string, baseDocument: Record<string, unknown>
                ): Promise<string> {
    const doc = {
      ...baseDocument,
      name,
      disturbances: [
        ...((baseDocument.disturbances as unknown[]) ?? []),
        ...this.view.pendingPatch,
      ],
    };
    const { id } = await this.api.registerScenario(doc, `promote-${name}`);
    return id;
  }

  renderResult(response: WhatIfResponse, impacted: string[]): void {
    clear(this.resultContainer);
    const table = el("table", { class: "delta-table" });
    table.append(el("tr", {}, [
      el("th", { text: "KPI" }), el("th", { text: "base" }),
      el("th", { text: "patched" }), el("th", { text: "delta" }),
    ]));
    const rows: { label: string; field: keyof KpiReportDoc;
                  fmt: (v: number) => string }[] = [
      { label: "Total cost", field: "total_cost", fmt: fmtQuantity },
      { label: "Service level", field: "service_level", fmt: fmtFraction },
      { label: "Unmet demand", field: "unmet_demand", fmt: fmtQuantity },
      { label: "Carbon", field: "carbon_total", fmt: fmtQuantity },
      { label: "Shipped units", field: "shipped_units", fmt: fmtQuantity },
    ];
    for (const row of rows) {
      const base = response.base_kpis[row.field] as number;
      const patched = response.patched_kpis[row.field] as number;
      table.append(el("tr", { "data-field": row.field as string }, [
        el("td", { text: row.label }),
        el("td", { class: "delta-base", text: row.fmt(base) }),
        el("td", { class: "delta-patched", text: row.fmt(patched) }),
        el("td", { class: "delta-value", text: fmtSigned(patched - base) }),
      ]));
    }
    this.resultContainer.append(table);
    if (impacted.length) {
      this.resultContainer.append(el("div", {
        class: "impacted-customers",
        text: `impacted customers: ${impacted.join(", ")}`,
      }));
    }
  }
}

/** Customers whose unmet demand grew, comparing two API-provided fields. */
export function impactedCustomers(response: WhatIfResponse): string[] {
  const base = response.base_unmet_by_customer ?? {};
  const patched = response.patched_unmet_by_customer ?? {};
  const out: string[] = [];
  for (const customer of Object.keys(patched)) {
    if ((patched[customer] ?? 0) > (base[customer] ?? 0)) out.push(customer);
  }
  return out.sort();
}
