import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { REQUEST_TERMINAL, StatusPoller, renderStatus } from "../src/polling";

function jsonResponse(payload: unknown): Response {
  return new Response(JSON.stringify(payload), { status: 200 });
}

describe("status poller", () => {
  let fetchSpy: ReturnType<typeof vi.fn>;

  beforeEach(() => {
    vi.useFakeTimers();
    fetchSpy = vi.fn();
    vi.stubGlobal("fetch", fetchSpy);
  });

  afterEach(() => {
    vi.unstubAllGlobals();
    vi.useRealTimers();
  });

  it("stops at a terminal status", async () => {
    const sequence = ["pending", "pending", "verified", "verified"];
    fetchSpy.mockImplementation(() =>
      Promise.resolve(jsonResponse({ status: sequence.shift() ?? "verified" })),
    );
    const seen: string[] = [];
    const poller = new StatusPoller("http://stack/x", REQUEST_TERMINAL, (s) => seen.push(s.status), 100);
    poller.start();
    for (let i = 0; i < 12; i++) await vi.advanceTimersByTimeAsync(100);
    expect(seen).toEqual(["pending", "pending", "verified"]);
    expect(fetchSpy).toHaveBeenCalledTimes(3); // nothing after the terminal state
  });

  it("declined is terminal and carries the reason through", async () => {
    fetchSpy.mockResolvedValue(jsonResponse({ status: "declined", reason: "CANNOT_SATISFY" }));
    const seen: { status: string; reason?: string }[] = [];
    const poller = new StatusPoller("http://stack/x", REQUEST_TERMINAL, (s) => seen.push(s), 100);
    poller.start();
    await vi.advanceTimersByTimeAsync(500);
    expect(seen).toEqual([{ status: "declined", reason: "CANNOT_SATISFY" }]);
    expect(fetchSpy).toHaveBeenCalledTimes(1);
  });

  it("coalesces overlapping polls for one id", async () => {
    let resolveFirst: ((r: Response) => void) | null = null;
    fetchSpy.mockImplementation(
      () =>
        new Promise<Response>((resolve) => {
          if (resolveFirst === null) resolveFirst = resolve;
          else resolve(jsonResponse({ status: "verified" }));
        }),
    );
    const poller = new StatusPoller("http://stack/x", REQUEST_TERMINAL, () => {}, 100);
    poller.start();
    // the first request hangs across several intervals; no second request fires
    await vi.advanceTimersByTimeAsync(450);
    expect(fetchSpy).toHaveBeenCalledTimes(1);
    resolveFirst!(jsonResponse({ status: "pending" }));
    await vi.advanceTimersByTimeAsync(150);
    expect(fetchSpy).toHaveBeenCalledTimes(2);
  });

  it("keeps polling through a transient outage and reports it", async () => {
    fetchSpy
      .mockRejectedValueOnce(new TypeError("fetch failed"))
      .mockResolvedValue(jsonResponse({ status: "verified" }));
    const seen: string[] = [];
    const poller = new StatusPoller("http://stack/x", REQUEST_TERMINAL, (s) => seen.push(s.status), 100);
    poller.start();
    await vi.advanceTimersByTimeAsync(400);
    expect(seen).toEqual(["error", "verified"]);
  });
});

describe("status rendering", () => {
  it("shows revealed values on success and reason on decline", () => {
    const el = document.createElement("div");
    renderStatus(el, "req9", { status: "verified", revealed: { pathogen: "SARS-CoV-2" } });
    expect(el.querySelector(".status-verified")?.textContent).toBe("verified");
    expect(el.querySelector(".revealed")?.textContent).toContain("SARS-CoV-2");

    renderStatus(el, "req9", { status: "declined", reason: "CANNOT_SATISFY" });
    expect(el.querySelector(".reason")?.textContent).toBe("CANNOT_SATISFY");
    expect(el.querySelector(".revealed")).toBeNull();
  });

  it("escapes markup in service data", () => {
    const el = document.createElement("div");
    renderStatus(el, "<img>", { status: "verified", revealed: { note: "<script>x</script>" } });
    expect(el.querySelector("img")).toBeNull();
    expect(el.querySelector("script")).toBeNull();
  });
});
