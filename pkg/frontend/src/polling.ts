/** Status polling with per-id coalescing.
 *
 * One poller owns one status URL. A tick that is still in flight when the
 * next interval fires is not duplicated, and a terminal status stops the
 * loop for good.
 */

import { errorText, getJson } from "./api";

export interface StatusSnapshot {
  status: string;
  reason?: string;
  revealed?: Record<string, string>;
  serial?: string;
}

export type StatusListener = (snap: StatusSnapshot) => void;

export class StatusPoller {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inFlight = false;
  private stopped = false;
  polls = 0;

  constructor(
    private readonly url: string,
    private readonly terminal: ReadonlySet<string>,
    private readonly listener: StatusListener,
    private readonly intervalMs = 700,
  ) {}

  start(): void {
    void this.tick();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
  }

  private schedule(): void {
    if (this.stopped) return;
    this.timer = setTimeout(() => void this.tick(), this.intervalMs);
  }

  private async tick(): Promise<void> {
    if (this.stopped) return;
    if (this.inFlight) {
      this.schedule(); // coalesce: never two requests for the same id
      return;
    }
    this.inFlight = true;
    try {
      const snap = await getJson<StatusSnapshot>(this.url);
      this.polls += 1;
      this.listener(snap);
      if (this.terminal.has(snap.status)) {
        this.stop();
        return;
      }
    } catch (err) {
      // transient outage: report it and keep polling
      this.listener({ status: "error", reason: errorText(err) });
    } finally {
      this.inFlight = false;
    }
    this.schedule();
  }
}

export const REQUEST_TERMINAL: ReadonlySet<string> = new Set(["verified", "declined"]);
export const ISSUANCE_TERMINAL: ReadonlySet<string> = new Set(["issued", "revoked"]);

/** Render a snapshot into a status view: id, status, reason on decline,
 * revealed table on success. */
export function renderStatus(el: HTMLElement, id: string, snap: StatusSnapshot): void {
  const parts: string[] = [
    `<span class="flow-id">${escapeHtml(id)}</span>`,
    `<span class="status status-${escapeHtml(snap.status)}">${escapeHtml(snap.status)}</span>`,
  ];
  if (snap.serial) parts.push(`<span class="serial">serial ${escapeHtml(snap.serial)}</span>`);
  if (snap.reason) parts.push(`<span class="reason">${escapeHtml(snap.reason)}</span>`);
  el.innerHTML = parts.join(" ");
  if (snap.revealed && Object.keys(snap.revealed).length > 0) {
    const rows = Object.entries(snap.revealed)
      .map(([k, v]) => `<tr><th>${escapeHtml(k)}</th><td>${escapeHtml(v)}</td></tr>`)
      .join("");
    el.innerHTML += `<table class="revealed">${rows}</table>`;
  }
}

export function escapeHtml(value: unknown): string {
  return String(value)
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
