/** Thin fetch wrapper around the vaxpass HTTP services.
 *
 * Every service reports failures as `{"error": CODE, "detail": text}`;
 * this module rehydrates those into ApiError so views can surface the
 * machine-readable code inline. No other state lives here: the UI is a
 * thin client and every displayed fact comes from a service response.
 */

export class ApiError extends Error {
  constructor(
    readonly code: string,
    readonly detail: string,
    readonly status: number,
  ) {
    super(detail ? `${code}: ${detail}` : code);
    this.name = "ApiError";
  }
}

export interface ServiceBases {
  issuer: string;
  verifier: string;
  wallet: string;
}

/** Mount points of the combined demo app, relative to one origin. */
export function serviceBases(origin: string): ServiceBases {
  const root = origin.replace(/\/$/, "");
  return {
    issuer: `${root}/issuer`,
    verifier: `${root}/verifier`,
    wallet: `${root}/wallet`,
  };
}

export function errorCode(err: unknown): string {
  return err instanceof ApiError ? err.code : "NETWORK";
}

export function errorText(err: unknown): string {
  if (err instanceof ApiError) return err.detail ? `${err.code}: ${err.detail}` : err.code;
  return `NETWORK: ${err instanceof Error ? err.message : String(err)}`;
}

async function run<T>(url: string, init?: RequestInit): Promise<T> {
  let res: Response;
  try {
    res = await fetch(url, init);
  } catch (err) {
    throw new ApiError("NETWORK", `cannot reach ${url}`, 0);
  }
  const text = await res.text();
  let body: unknown = null;
  try {
    body = text ? JSON.parse(text) : null;
  } catch {
    body = null; // non-JSON error page; fall through to status handling
  }
  if (!res.ok) {
    const e = (body ?? {}) as { error?: string; detail?: string };
    throw new ApiError(e.error ?? `HTTP_${res.status}`, e.detail ?? text, res.status);
  }
  return body as T;
}

export function getJson<T>(url: string): Promise<T> {
  return run<T>(url);
}

export function postJson<T>(url: string, payload: unknown): Promise<T> {
  return postRaw<T>(url, JSON.stringify(payload));
}

/** POST a pre-serialized JSON body. Views that promise "what you see is
 * what is sent" pass their preview text here untouched. */
export function postRaw<T>(url: string, body: string): Promise<T> {
  return run<T>(url, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body,
  });
}
