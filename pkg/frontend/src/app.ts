/**
 * Console wiring: one page, four panes (graph, KPIs, alerts, what-if),
 * one alert-stream connection. Mutations are optimistic only for alert
 * acknowledgment; everything else re-renders from API responses.
 */

import { TwinApi } from "./api.js";
import { AlertCenter } from "./alertCenter.js";
import { AlertStream } from "./alertStream.js";
import { el } from "./dom.js";
import { renderGraphView } from "./graphView.js";
import { renderKpiTiles, renderKpiTrends } from "./kpiPanel.js";
import { initialViewState, toggleSelection } from "./state.js";
import { WhatIfBuilder } from "./whatifBuilder.js";
import type { LayerKind, SnapshotDoc } from "./types.js";

export interface ConsoleConfig {
  baseUrl: string;
  token?: string;
  writeEnabled?: boolean;
}

export class OperatorConsole {
  api: TwinApi;
  view = initialViewState();
  alertCenter: AlertCenter;
  whatif: WhatIfBuilder;
  stream: AlertStream | null = null;
  private snapshot: SnapshotDoc | null = null;

  constructor(private root: HTMLElement, config: ConsoleConfig) {
    this.api = new TwinApi({
      baseUrl: config.baseUrl,
      token: config.token,
      writeEnabled: config.writeEnabled ?? true,
    });
    this.root.append(this.skeleton());
    this.alertCenter = new AlertCenter(
      this.api,
      this.pane("alerts-live"),
      this.pane("alerts-history"),
      () => this.flashBanner("critical alert received"));
    this.whatif = new WhatIfBuilder(
      this.api, this.view,
      this.pane("whatif-patch"), this.pane("whatif-result"));
    this.whatif.renderPatch();
  }

  private skeleton(): HTMLElement {
    return el("div", { class: "console-grid" }, [
      el("div", { id: "banner", class: "banner hidden" }),
      el("section", { id: "graph-pane", class: "pane" }, [
        el("h2", { text: "Network" }),
        el("div", { id: "layer-toggles" }),
        el("div", { id: "graph-view" }),
      ]),
      el("section", { id: "kpi-pane", class: "pane" }, [
        el("h2", { text: "KPIs" }),
        el("div", { id: "kpi-tiles" }),
        el("div", { id: "kpi-trends" }),
      ]),
      el("section", { id: "alert-pane", class: "pane" }, [
        el("h2", { text: "Alerts" }),
        el("div", { id: "alerts-live" }),
        el("h3", { text: "History" }),
        el("div", { id: "alerts-history" }),
      ]),
      el("section", { id: "whatif-pane", class: "pane" }, [
        el("h2", { text: "What-if" }),
        el("div", { id: "whatif-patch" }),
        el("div", { id: "whatif-result" }),
      ]),
    ]);
  }

  pane(id: string): HTMLElement {
    return this.root.querySelector(`#${id}`) as HTMLElement;
  }

  flashBanner(message: string): void {
    const banner = this.pane("banner");
    banner.textContent = message;
    banner.classList.remove("hidden");
  }

  async refreshGraph(tick?: number): Promise<void> {
    this.snapshot = await this.api.snapshot(tick);
    this.renderGraph();
    this.renderLayerToggles();
  }

  renderGraph(): void {
    if (!this.snapshot) return;
    renderGraphView(this.pane("graph-view"), this.snapshot, this.view, {
      onSelect: (elementId, isEdge) => {
        toggleSelection(this.view, elementId);
        if (this.view.selectedElements.includes(elementId)) {
          this.whatif.addOutage(elementId, isEdge, 0, null);
        }
        this.renderGraph();
      },
    });
  }

  renderLayerToggles(): void {
    const box = this.pane("layer-toggles");
    box.textContent = "";
    (["material", "information", "financial"] as LayerKind[]).forEach(layer => {
      const button = el("button", {
        class: `layer-toggle ${this.view.layerToggles[layer] ? "on" : "off"}`,
        "data-layer": layer,
        text: layer,
      });
      button.addEventListener("click", () => {
        this.view.layerToggles[layer] = !this.view.layerToggles[layer];
        this.renderGraph();
        this.renderLayerToggles();
      });
      box.append(button);
    });
  }

  async refreshKpis(run?: string): Promise<void> {
    const { run: runId, report } = await this.api.kpis(run);
    renderKpiTiles(this.pane("kpi-tiles"), report);
    const { series } = await this.api.kpiSeries(runId, 5);
    renderKpiTrends(this.pane("kpi-trends"), series);
  }

  async connectAlerts(): Promise<void> {
    const page = await this.api.alerts(0);
    this.alertCenter.ingestPage(page.alerts);
    const headers: Record<string, string> = {};
    if (this.api.config.token) {
      headers["Authorization"] = `Bearer ${this.api.config.token}`;
    }
    this.stream = new AlertStream(
      this.api.config.baseUrl,
      {
        onAlert: alert => this.alertCenter.ingest(alert),
        onStatus: connected => {
          const banner = this.pane("banner");
          if (!connected) {
            banner.textContent = "alert stream disconnected; reconnecting";
            banner.classList.remove("hidden");
          } else {
            banner.classList.add("hidden");
          }
        },
      },
      page.next_cursor,
      this.api.rawFetch(),
      500,
      headers);
    void this.stream.run();
  }
}

declare global {
  interface Window { chaintwinConsole?: OperatorConsole }
}

if (typeof document !== "undefined" && document.getElementById("console-root")) {
  const root = document.getElementById("console-root") as HTMLElement;
  const params = new URLSearchParams(window.location.search);
  const consoleApp = new OperatorConsole(root, {
    baseUrl: params.get("api") ?? "",
    token: params.get("token") ?? undefined,
  });
  window.chaintwinConsole = consoleApp;
  void consoleApp.refreshGraph();
  void consoleApp.connectAlerts();
  void consoleApp.refreshKpis().catch(() => {
    // no completed runs yet: tiles stay empty
  });
}
