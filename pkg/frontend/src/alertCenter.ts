/**
 * Alert triage: live list ordered by severity then tick, one-click
 * acknowledgment (optimistic, rolled back if the API refuses), and a
 * history pane for acknowledged alerts. Stream duplicates never reach this
 * module twice (AlertStream dedups by id), and re-renders are keyed by id
 * so a repeated render cannot double an alert either.
 */

import { clear, el } from "./dom.js";
import { fmtTick } from "./format.js";
import type { TwinApi } from "./api.js";
import type { AlertDoc } from "./types.js";

const SEVERITY_ORDER: Record<string, number> = {
  critical: 0, warning: 1, info: 2,
};

export class AlertCenter {
  private byId = new Map<number, AlertDoc>();

  constructor(private api: TwinApi,
              private liveContainer: HTMLElement,
              private historyContainer: HTMLElement,
              private onCritical?: (alert: AlertDoc) => void) {}

  ingest(alert: AlertDoc): void {
    const existing = this.byId.get(alert.id);
    this.byId.set(alert.id, alert);
    if (!existing && alert.severity === "critical" && !alert.acknowledged) {
      this.onCritical?.(alert);
    }
    this.render();
  }

  ingestPage(alerts: AlertDoc[]): void {
    for (const alert of alerts) this.byId.set(alert.id, alert);
    this.render();
  }

  async acknowledge(id: number): Promise<void> {
    const alert = this.byId.get(id);
    if (!alert) return;
    const previous = alert.acknowledged;
    alert.acknowledged = true; // optimistic
    this.render();
    try {
      const confirmed = await this.api.ackAlert(id);
      this.byId.set(id, confirmed);
    } catch (err) {
      alert.acknowledged = previous; // roll back
      this.render();
      throw err;
    }
    this.render();
  }

  open(): AlertDoc[] {
    return [...this.byId.values()]
      .filter(a => !a.acknowledged)
      .sort((a, b) =>
        (SEVERITY_ORDER[a.severity] - SEVERITY_ORDER[b.severity])
        || (a.tick - b.tick) || (a.id - b.id));
  }

  history(): AlertDoc[] {
    return [...this.byId.values()]
      .filter(a => a.acknowledged)
      .sort((a, b) => a.id - b.id);
  }

  render(): void {
    clear(this.liveContainer);
    const open = this.open();
    if (!open.length) {
      this.liveContainer.append(el("div", {
        class: "empty-state", text: "No open alerts.",
      }));
    }
    for (const alert of open) {
      this.liveContainer.append(this.renderRow(alert, true));
    }
    clear(this.historyContainer);
    for (const alert of this.history()) {
      this.historyContainer.append(this.renderRow(alert, false));
    }
  }

  private renderRow(alert: AlertDoc, withAck: boolean): HTMLElement {
    const row = el("div", {
      class: `alert-row severity-${alert.severity}`,
      "data-alert-id": String(alert.id),
    }, [
      el("span", { class: "alert-severity", text: alert.severity }),
      el("span", { class: "alert-tick", text: `t${fmtTick(alert.tick)}` }),
      el("span", { class: "alert-subject", text: alert.subject }),
      el("span", { class: "alert-message", text: alert.message }),
    ]);
    if (alert.imputed) {
      row.append(el("span", { class: "alert-imputed", text: "imputed basis" }));
    }
    if (withAck) {
      const button = el("button", { class: "ack-button", text: "ack" });
      button.addEventListener("click", () => {
        void this.acknowledge(alert.id);
      });
      row.append(button);
    }
    return row;
  }
}
