/** Verifier-side proof request builder.
 *
 * What the preview shows is what the service receives: the POST body is
 * the preview text itself, not a re-serialization. Predicates are limited
 * to the orderable attributes (dates and dose); the verifier encodes raw
 * bounds server-side. An empty template is sent as-is so the service's
 * BAD_TEMPLATE answer surfaces inline, exactly like any other 4xx.
 */

import { ApiError, errorText, postRaw } from "./api";
import { REQUEST_TERMINAL, StatusPoller, escapeHtml, renderStatus } from "./polling";
import { qrElement } from "./qr";
import { FIELD_NAMES } from "./vaccination";

export const ORDERED_ATTRS = ["birth_date", "dose", "vaccination_date"] as const;

export interface PredicateRow {
  attr: string;
  op: "ge" | "le";
  value: string;
}

export interface AllowedRow {
  attr: string;
  values: string; // comma-separated in the editor
}

export interface ProofRequestModel {
  revealed: Set<string>;
  predicates: PredicateRow[];
  allowed: AllowedRow[];
}

export function emptyModel(): ProofRequestModel {
  return { revealed: new Set(), predicates: [], allowed: [] };
}

/** The exact object POSTed to /proof-requests. Sections the operator left
 * empty are omitted rather than sent as empty lists. */
export function buildTemplate(model: ProofRequestModel): Record<string, unknown> {
  const template: Record<string, unknown> = {};
  if (model.revealed.size > 0) {
    template.revealed = FIELD_NAMES.filter((f) => model.revealed.has(f));
  }
  const predicates = model.predicates
    .filter((p) => p.value.trim() !== "")
    .map((p) => ({
      attr: p.attr,
      op: p.op,
      value: p.attr === "dose" ? Number(p.value) : p.value.trim(),
    }));
  if (predicates.length > 0) template.predicates = predicates;
  const allowed = model.allowed
    .map((a) => ({
      attr: a.attr,
      values: a.values.split(",").map((v) => v.trim()).filter((v) => v !== ""),
    }))
    .filter((a) => a.values.length > 0);
  if (allowed.length > 0) template.allowed = allowed;
  return template;
}

export function templateJson(model: ProofRequestModel): string {
  return JSON.stringify(buildTemplate(model), null, 2);
}

interface RequestReply {
  request_id: string;
  invitation: string;
}

export interface ProofRequestOptions {
  verifierBase: string;
  pollIntervalMs?: number;
  onRequest?: (reply: RequestReply) => void;
}

export function mountProofRequestBuilder(root: HTMLElement, opts: ProofRequestOptions): void {
  const doc = root.ownerDocument;
  root.innerHTML = `
    <form class="proof-request-form" novalidate>
      <fieldset class="revealed-picker">
        <legend>Reveal attributes</legend>
        ${FIELD_NAMES.map(
          (name) => `
          <label><input type="checkbox" name="revealed" value="${name}"> ${escapeHtml(name)}</label>`,
        ).join("")}
      </fieldset>
      <fieldset class="predicate-editor">
        <legend>Predicates</legend>
        <div class="predicate-rows"></div>
        <button type="button" class="add-predicate">Add predicate</button>
      </fieldset>
      <fieldset class="allowed-editor">
        <legend>Allowed values</legend>
        <div class="allowed-rows"></div>
        <button type="button" class="add-allowed">Add allowed list</button>
      </fieldset>
      <pre class="template-preview"></pre>
      <button type="submit">Send proof request</button>
      <div class="banner" role="alert" hidden></div>
    </form>
    <div class="request-result"></div>
  `;

  const form = root.querySelector("form") as HTMLFormElement;
  const preview = root.querySelector(".template-preview") as HTMLElement;
  const banner = form.querySelector(".banner") as HTMLElement;
  const result = root.querySelector(".request-result") as HTMLElement;
  const predicateRows = form.querySelector(".predicate-rows") as HTMLElement;
  const allowedRows = form.querySelector(".allowed-rows") as HTMLElement;

  const model = emptyModel();

  function refreshPreview(): void {
    preview.textContent = templateJson(model);
  }

  function syncModel(): void {
    model.revealed = new Set(
      Array.from(form.querySelectorAll<HTMLInputElement>("input[name=revealed]:checked")).map(
        (el) => el.value,
      ),
    );
    model.predicates = Array.from(predicateRows.querySelectorAll(".predicate-row")).map((row) => ({
      attr: (row.querySelector(".pred-attr") as HTMLSelectElement).value,
      op: (row.querySelector(".pred-op") as HTMLSelectElement).value as "ge" | "le",
      value: (row.querySelector(".pred-value") as HTMLInputElement).value,
    }));
    model.allowed = Array.from(allowedRows.querySelectorAll(".allowed-row")).map((row) => ({
      attr: (row.querySelector(".allowed-attr") as HTMLSelectElement).value,
      values: (row.querySelector(".allowed-values") as HTMLInputElement).value,
    }));
    refreshPreview();
  }

  function addPredicateRow(): void {
    const row = doc.createElement("div");
    row.className = "predicate-row";
    row.innerHTML = `
      <select class="pred-attr">${ORDERED_ATTRS.map((a) => `<option>${a}</option>`).join("")}</select>
      <select class="pred-op"><option>ge</option><option>le</option></select>
      <input class="pred-value" placeholder="bound">
      <button type="button" class="remove-row">remove</button>
    `;
    (row.querySelector(".pred-attr") as HTMLSelectElement).value = "dose";
    predicateRows.append(row);
    syncModel();
  }

  function addAllowedRow(): void {
    const row = doc.createElement("div");
    row.className = "allowed-row";
    row.innerHTML = `
      <select class="allowed-attr">${FIELD_NAMES.map((a) => `<option>${a}</option>`).join("")}</select>
      <input class="allowed-values" placeholder="comma,separated,values">
      <button type="button" class="remove-row">remove</button>
    `;
    allowedRows.append(row);
    syncModel();
  }

  (form.querySelector(".add-predicate") as HTMLButtonElement).addEventListener("click", addPredicateRow);
  (form.querySelector(".add-allowed") as HTMLButtonElement).addEventListener("click", addAllowedRow);
  form.addEventListener("input", syncModel);
  form.addEventListener("change", syncModel);
  form.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.classList.contains("remove-row")) {
      target.closest(".predicate-row, .allowed-row")?.remove();
      syncModel();
    }
  });

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    banner.hidden = true;
    const body = preview.textContent ?? "";
    postRaw<RequestReply>(`${opts.verifierBase}/proof-requests`, body)
      .then((reply) => {
        result.innerHTML = `
          <p class="request-id">request <code>${escapeHtml(reply.request_id)}</code></p>
          <p>Show this to the holder:</p>
        `;
        result.append(qrElement(doc, reply.invitation));
        const statusEl = doc.createElement("div");
        statusEl.className = "flow-status";
        result.append(statusEl);
        const poller = new StatusPoller(
          `${opts.verifierBase}/proof-requests/${reply.request_id}`,
          REQUEST_TERMINAL,
          (snap) => renderStatus(statusEl, reply.request_id, snap),
          opts.pollIntervalMs ?? 700,
        );
        poller.start();
        opts.onRequest?.(reply);
      })
      .catch((err: unknown) => {
        banner.hidden = false;
        banner.textContent = errorText(err);
        banner.dataset.code = err instanceof ApiError ? err.code : "NETWORK";
      });
  });

  refreshPreview();
}
