/** Vaccinator data-entry form.
 *
 * Client-side checks mirror the issuer's intake rules so obvious mistakes
 * never leave the browser: all seven fields present, dates in YYYY-MM-DD,
 * dose a whole number of at least 1. Submit stays disabled until every
 * field is valid; the service response (issuance id + invitation) renders
 * as a QR plus a live issuance status.
 */

import { ApiError, errorText, postJson } from "./api";
import { ISSUANCE_TERMINAL, StatusPoller, escapeHtml, renderStatus } from "./polling";
import { qrElement } from "./qr";

export const FIELD_NAMES = [
  "full_name",
  "birth_date",
  "pathogen",
  "laboratory",
  "dose",
  "vaccination_date",
  "location",
] as const;

export type FieldName = (typeof FIELD_NAMES)[number];

const LABELS: Record<FieldName, string> = {
  full_name: "Full name",
  birth_date: "Birth date",
  pathogen: "Pathogen",
  laboratory: "Laboratory",
  dose: "Dose number",
  vaccination_date: "Vaccination date",
  location: "Location",
};

const DATE_FIELDS: ReadonlySet<string> = new Set(["birth_date", "vaccination_date"]);

export type FormValues = Record<FieldName, string>;

export function emptyForm(): FormValues {
  return Object.fromEntries(FIELD_NAMES.map((f) => [f, ""])) as FormValues;
}

function isCalendarDate(value: string): boolean {
  if (!/^\d{4}-\d{2}-\d{2}$/.test(value)) return false;
  const [y, m, d] = value.split("-").map(Number) as [number, number, number];
  const date = new Date(Date.UTC(y, m - 1, d));
  return date.getUTCFullYear() === y && date.getUTCMonth() === m - 1 && date.getUTCDate() === d;
}

/** null when valid, else the inline message (prefixed with the error code
 * the service would have answered with). */
export function validateField(name: FieldName, value: string): string | null {
  if (value.trim() === "") return "MISSING_FIELD: required";
  if (DATE_FIELDS.has(name) && !isCalendarDate(value)) {
    return "BAD_FORMAT: must be a calendar date, YYYY-MM-DD";
  }
  if (name === "dose") {
    if (!/^\d+$/.test(value.trim())) return "BAD_FORMAT: dose must be a whole number";
    if (Number(value) < 1) return "BAD_FORMAT: dose must be at least 1";
  }
  return null;
}

export function formErrors(values: FormValues): Partial<Record<FieldName, string>> {
  const errors: Partial<Record<FieldName, string>> = {};
  for (const name of FIELD_NAMES) {
    const problem = validateField(name, values[name]);
    if (problem) errors[name] = problem;
  }
  return errors;
}

export function formValid(values: FormValues): boolean {
  return Object.keys(formErrors(values)).length === 0;
}

export function recordFromForm(values: FormValues): Record<string, string | number> {
  const record: Record<string, string | number> = {};
  for (const name of FIELD_NAMES) {
    record[name] = name === "dose" ? Number(values[name]) : values[name].trim();
  }
  return record;
}

interface IssuanceReply {
  issuance_id: string;
  invitation: string;
}

export interface VaccinationFormOptions {
  issuerBase: string;
  pollIntervalMs?: number;
  onIssuance?: (reply: IssuanceReply) => void;
}

export function mountVaccinationForm(root: HTMLElement, opts: VaccinationFormOptions): void {
  const doc = root.ownerDocument;
  root.innerHTML = `
    <form class="vaccination-form" novalidate>
      ${FIELD_NAMES.map(
        (name) => `
        <label class="field" data-field="${name}">
          <span class="field-label">${escapeHtml(LABELS[name])}</span>
          <input name="${name}" autocomplete="off"
                 ${DATE_FIELDS.has(name) ? 'placeholder="YYYY-MM-DD"' : ""}
                 ${name === "dose" ? 'inputmode="numeric"' : ""}>
          <span class="field-error" role="alert"></span>
        </label>`,
      ).join("")}
      <button type="submit" disabled>Issue credential</button>
      <div class="banner" role="alert" hidden></div>
    </form>
    <div class="issuance-result"></div>
  `;

  const form = root.querySelector("form") as HTMLFormElement;
  const submit = form.querySelector("button[type=submit]") as HTMLButtonElement;
  const banner = form.querySelector(".banner") as HTMLElement;
  const result = root.querySelector(".issuance-result") as HTMLElement;

  const values = emptyForm();
  const touched = new Set<FieldName>();

  function refresh(): void {
    const errors = formErrors(values);
    for (const name of FIELD_NAMES) {
      const span = form.querySelector(`[data-field="${name}"] .field-error`) as HTMLElement;
      span.textContent = touched.has(name) ? (errors[name] ?? "") : "";
    }
    submit.disabled = Object.keys(errors).length > 0;
  }

  form.addEventListener("input", (event) => {
    const input = event.target as HTMLInputElement;
    const name = input.name as FieldName;
    if (!FIELD_NAMES.includes(name)) return;
    values[name] = input.value;
    touched.add(name);
    refresh();
  });

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    for (const name of FIELD_NAMES) touched.add(name);
    refresh();
    if (!formValid(values)) return; // invalid input never leaves the browser
    banner.hidden = true;
    submit.disabled = true;
    postJson<IssuanceReply>(`${opts.issuerBase}/vaccinations`, recordFromForm(values))
      .then((reply) => {
        result.innerHTML = `
          <p class="issuance-id">issuance <code>${escapeHtml(reply.issuance_id)}</code></p>
          <p>Ask the vaccinee to scan this invitation:</p>
        `;
        result.append(qrElement(doc, reply.invitation));
        const statusEl = doc.createElement("div");
        statusEl.className = "flow-status";
        result.append(statusEl);
        const poller = new StatusPoller(
          `${opts.issuerBase}/issuances/${reply.issuance_id}`,
          ISSUANCE_TERMINAL,
          (snap) => renderStatus(statusEl, reply.issuance_id, snap),
          opts.pollIntervalMs ?? 700,
        );
        poller.start();
        opts.onIssuance?.(reply);
      })
      .catch((err: unknown) => {
        banner.hidden = false;
        banner.textContent = errorText(err);
        banner.dataset.code = err instanceof ApiError ? err.code : "NETWORK";
      })
      .finally(() => refresh());
  });

  refresh();
}
