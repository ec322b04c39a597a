/**
 * Resumable alert stream over server-sent events.
 *
 * Keeps a monotone cursor (last alert id + 1); reconnecting after a drop
 * resumes from there, so nothing is lost. Delivery is at-least-once, so
 * duplicates arrive by design and are filtered by alert id before the
 * handler ever sees them.
 */

import type { AlertDoc } from "./types.js";

export interface StreamCallbacks {
  onAlert: (alert: AlertDoc) => void;
  onStatus?: (connected: boolean) => void;
}

export class AlertStream {
  cursor: number;
  private seen = new Set<number>();
  private stopped = false;
  private fetchImpl: typeof fetch;
  private controller: AbortController | null = null;

  constructor(private baseUrl: string, private callbacks: StreamCallbacks,
              startCursor = 0, fetchImpl?: typeof fetch,
              private reconnectDelayMs = 250,
              private headers: Record<string, string> = {}) {
    this.cursor = startCursor;
    this.fetchImpl = fetchImpl ?? fetch;
  }

  /** Connect and keep consuming until stop(); reconnects with the cursor. */
  async run(): Promise<void> {
    while (!this.stopped) {
      try {
        await this.consumeOnce();
      } catch {
        // fall through to reconnect
      }
      this.callbacks.onStatus?.(false);
      if (this.stopped) break;
      await sleep(this.reconnectDelayMs);
    }
  }

  /** One connection lifetime; resolves when the stream ends or errors. */
  async consumeOnce(): Promise<void> {
    this.controller = new AbortController();
    const res = await this.fetchImpl(
      `${this.baseUrl}/alerts/stream?since=${this.cursor}`,
      { headers: this.headers, signal: this.controller.signal });
    if (!res.ok || !res.body) throw new Error(`stream HTTP ${res.status}`);
    this.callbacks.onStatus?.(true);
    const reader = res.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    while (!this.stopped) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      let sep: number;
      while ((sep = buffer.indexOf("\n\n")) >= 0) {
        const frame = buffer.slice(0, sep);
        buffer = buffer.slice(sep + 2);
        this.handleFrame(frame);
      }
    }
    if (this.stopped) await reader.cancel().catch(() => undefined);
  }

  private handleFrame(frame: string): void {
    const dataLine = frame.split("\n").find(l => l.startsWith("data: "));
    if (!dataLine) return;
    let alert: AlertDoc;
    try {
      alert = JSON.parse(dataLine.slice(6));
    } catch {
      return;
    }
    this.cursor = Math.max(this.cursor, alert.id + 1);
    if (this.seen.has(alert.id)) return; // duplicate delivery: render once
    this.seen.add(alert.id);
    this.callbacks.onAlert(alert);
  }

  stop(): void {
    this.stopped = true;
    this.controller?.abort(); // unblocks an in-flight read immediately
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise(resolve => setTimeout(resolve, ms));
}
