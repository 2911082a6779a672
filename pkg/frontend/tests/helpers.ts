/** Shared test utilities: QR rasterizing for the independent decoder and
 * a DOM waiter for asynchronous view updates. */

import jsQR from "jsqr";
import { QUIET_ZONE } from "../src/qr";

/** Paint a module matrix into RGBA pixels and decode it with jsQR, a
 * decoder that shares no code with the renderer. */
export function decodeModules(size: number, modules: Uint8Array, scale = 4): string {
  const span = (size + 2 * QUIET_ZONE) * scale;
  const rgba = new Uint8ClampedArray(span * span * 4).fill(255);
  for (let row = 0; row < size; row++) {
    for (let col = 0; col < size; col++) {
      if (!modules[row * size + col]) continue;
      const x0 = (col + QUIET_ZONE) * scale;
      const y0 = (row + QUIET_ZONE) * scale;
      for (let dy = 0; dy < scale; dy++) {
        for (let dx = 0; dx < scale; dx++) {
          const p = ((y0 + dy) * span + x0 + dx) * 4;
          rgba[p] = rgba[p + 1] = rgba[p + 2] = 0;
        }
      }
    }
  }
  const hit = jsQR(rgba, span, span);
  if (!hit) throw new Error("jsQR could not decode the rendered symbol");
  return hit.data;
}

export async function waitFor<T>(
  probe: () => T | null | undefined | false,
  label: string,
  timeoutMs = 30_000,
  stepMs = 50,
): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const got = probe();
    if (got) return got;
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${label}`);
    await new Promise((r) => setTimeout(r, stepMs));
  }
}

export function setInput(el: HTMLInputElement | HTMLTextAreaElement, value: string): void {
  el.value = value;
  el.dispatchEvent(new Event("input", { bubbles: true }));
}
