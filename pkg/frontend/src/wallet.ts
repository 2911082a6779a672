/** Wallet consent view, backed by the CLI wallet's localhost bridge.
 *
 * Keys never reach the browser: every action is a bridge call and every
 * displayed fact is a bridge response. The view covers connecting from a
 * pasted invitation (accept or deny), consenting to pending offers and
 * proof requests, and reading back credentials and connections.
 */

import { ApiError, errorText, getJson, postJson } from "./api";
import { escapeHtml } from "./polling";

interface PendingItem {
  id: string;
  kind: string;
  from: string;
  claims?: Record<string, unknown>;
  request?: Record<string, unknown>;
}

interface CredentialRow {
  serial: string;
  issuer_did: string;
  claims: Record<string, unknown>;
  revoked: boolean;
}

interface ConnectionRow {
  connection_id: string;
  remote_did: string;
}

export interface WalletPanelOptions {
  walletBase: string;
}

export function mountWalletPanel(root: HTMLElement, opts: WalletPanelOptions): { refresh: () => Promise<void> } {
  root.innerHTML = `
    <div class="wallet-panel">
      <div class="banner" role="alert" hidden></div>
      <section class="connect-box">
        <h3>Connect</h3>
        <textarea class="invitation-input" rows="3" placeholder="paste invitation payload"></textarea>
        <button type="button" class="connect-accept">Accept invitation</button>
        <button type="button" class="connect-deny">Deny</button>
      </section>
      <section class="pending-box">
        <h3>Pending consent</h3>
        <ul class="pending-list"></ul>
      </section>
      <section class="credentials-box">
        <h3>Credentials</h3>
        <button type="button" class="sync-button">Sync revocation</button>
        <ul class="credential-list"></ul>
      </section>
      <section class="connections-box">
        <h3>Connections</h3>
        <ul class="connection-list"></ul>
      </section>
    </div>
  `;

  const banner = root.querySelector(".banner") as HTMLElement;
  const invitationInput = root.querySelector(".invitation-input") as HTMLTextAreaElement;
  const pendingList = root.querySelector(".pending-list") as HTMLElement;
  const credentialList = root.querySelector(".credential-list") as HTMLElement;
  const connectionList = root.querySelector(".connection-list") as HTMLElement;

  function note(text: string, code = ""): void {
    banner.hidden = false;
    banner.textContent = text;
    banner.dataset.code = code;
  }

  function fail(err: unknown): void {
    note(errorText(err), err instanceof ApiError ? err.code : "NETWORK");
  }

  function describe(item: PendingItem): string {
    if (item.kind === "credential-offer" && item.claims) {
      const claims = Object.entries(item.claims)
        .map(([k, v]) => `${k}=${v}`)
        .join(", ");
      return `credential offer from ${item.from}: ${claims}`;
    }
    if (item.kind === "proof-request" && item.request) {
      return `proof request from ${item.from}: ${JSON.stringify(item.request)}`;
    }
    return `${item.kind} from ${item.from}`;
  }

  async function refresh(): Promise<void> {
    try {
      const [pending, creds, conns] = await Promise.all([
        getJson<{ pending: PendingItem[] }>(`${opts.walletBase}/pending`),
        getJson<{ credentials: CredentialRow[] }>(`${opts.walletBase}/credentials`),
        getJson<{ connections: ConnectionRow[] }>(`${opts.walletBase}/connections`),
      ]);
      pendingList.innerHTML = pending.pending
        .map(
          (item) => `
          <li class="pending-item" data-id="${escapeHtml(item.id)}" data-kind="${escapeHtml(item.kind)}">
            <span class="pending-text">${escapeHtml(describe(item))}</span>
            <button type="button" class="item-accept">Accept</button>
            <button type="button" class="item-decline">Decline</button>
          </li>`,
        )
        .join("");
      credentialList.innerHTML = creds.credentials
        .map((c) => {
          const claims = Object.entries(c.claims)
            .map(([k, v]) => `${k}=${v}`)
            .join(", ");
          const flag = c.revoked ? "REVOKED" : "ok";
          return `<li class="credential-item" data-serial="${escapeHtml(c.serial)}" data-revoked="${c.revoked}">
            <span class="cred-flag">[${flag}]</span> <code>${escapeHtml(c.serial)}</code> ${escapeHtml(claims)}
          </li>`;
        })
        .join("");
      connectionList.innerHTML = conns.connections
        .map(
          (c) =>
            `<li class="connection-item">${escapeHtml(c.connection_id)} → ${escapeHtml(c.remote_did)}</li>`,
        )
        .join("");
    } catch (err) {
      fail(err);
    }
  }

  async function connect(consent: boolean): Promise<void> {
    banner.hidden = true;
    const payload = invitationInput.value.trim();
    try {
      const summary = await postJson<{ remote_did: string }>(`${opts.walletBase}/connect`, {
        payload,
        consent,
      });
      note(`connected to ${summary.remote_did}`, "CONNECTED");
      invitationInput.value = "";
    } catch (err) {
      // a deliberate deny comes back as DECLINED with nothing stored
      fail(err);
    }
    await refresh();
  }

  (root.querySelector(".connect-accept") as HTMLButtonElement).addEventListener("click", () => void connect(true));
  (root.querySelector(".connect-deny") as HTMLButtonElement).addEventListener("click", () => void connect(false));
  (root.querySelector(".sync-button") as HTMLButtonElement).addEventListener("click", () => {
    banner.hidden = true;
    postJson<{ credentials: { serial: string; revoked: boolean }[] }>(`${opts.walletBase}/sync`, {})
      .then((out) => {
        const flagged = out.credentials.filter((r) => r.revoked).map((r) => r.serial);
        note(flagged.length ? `revoked: ${flagged.join(", ")}` : "all credentials still valid", "SYNCED");
        return refresh();
      })
      .catch(fail);
  });

  pendingList.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (!(target instanceof HTMLButtonElement)) return;
    const item = target.closest(".pending-item") as HTMLElement | null;
    if (!item) return;
    const decision = target.classList.contains("item-accept") ? "accept" : "decline";
    banner.hidden = true;
    postJson<{ state: string; detail?: string; code?: string }>(`${opts.walletBase}/respond`, {
      id: item.dataset.id,
      decision,
    })
      .then((outcome) => {
        const extra = outcome.detail ?? outcome.code ?? "";
        note(`${item.dataset.kind}: ${outcome.state}${extra ? ` (${extra})` : ""}`, outcome.code ?? "");
        return refresh();
      })
      .catch(fail);
  });

  void refresh();
  return { refresh };
}
