/** QR rendering for invitation payloads.
 *
 * The SVG draws exactly one rect per dark module of the symbol produced
 * for the payload string, so the image encodes the service payload
 * byte-for-byte (covered by a decode roundtrip test). Camera scanning is
 * out of scope for the demo, so the payload is also offered as text next
 * to the image for paste/download.
 */

import QRCode from "qrcode";

export const QUIET_ZONE = 4; // modules of white border, per the QR standard

export interface QrImage {
  payload: string;
  size: number; // modules per side, without quiet zone
  modules: Uint8Array; // row-major, 1 = dark
  svg: string;
}

export function makeQr(payload: string): QrImage {
  const code = QRCode.create(payload, { errorCorrectionLevel: "M" });
  const size = code.modules.size;
  const modules = Uint8Array.from(code.modules.data);
  const span = size + 2 * QUIET_ZONE;
  const rects: string[] = [];
  for (let row = 0; row < size; row++) {
    for (let col = 0; col < size; col++) {
      if (modules[row * size + col]) {
        rects.push(`<rect x="${col + QUIET_ZONE}" y="${row + QUIET_ZONE}" width="1" height="1"/>`);
      }
    }
  }
  const svg =
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${span} ${span}" ` +
    `shape-rendering="crispEdges" role="img" aria-label="invitation QR code">` +
    `<rect width="${span}" height="${span}" fill="#fff"/>` +
    `<g fill="#000">${rects.join("")}</g></svg>`;
  return { payload, size, modules, svg };
}

/** Container showing the QR plus the exact payload text for copy/paste. */
export function qrElement(doc: Document, payload: string): HTMLElement {
  const qr = makeQr(payload);
  const box = doc.createElement("figure");
  box.className = "qr-box";
  const image = doc.createElement("div");
  image.className = "qr-image";
  image.innerHTML = qr.svg;
  const text = doc.createElement("textarea");
  text.className = "qr-payload";
  text.readOnly = true;
  text.value = payload;
  text.rows = 4;
  box.append(image, text);
  return box;
}

/** Read the module matrix back out of a rendered QR container. Used by
 * tests to prove the displayed image, not some side channel, carries the
 * payload. */
export function modulesFromSvg(container: Element): { size: number; modules: Uint8Array } {
  const svg = container.querySelector("svg");
  if (!svg) throw new Error("no QR svg in container");
  const viewBox = (svg.getAttribute("viewBox") ?? "").split(" ");
  const span = Number(viewBox[3] ?? 0);
  const size = span - 2 * QUIET_ZONE;
  const modules = new Uint8Array(size * size);
  for (const rect of Array.from(svg.querySelectorAll("g rect"))) {
    const col = Number(rect.getAttribute("x")) - QUIET_ZONE;
    const row = Number(rect.getAttribute("y")) - QUIET_ZONE;
    modules[row * size + col] = 1;
  }
  return { size, modules };
}
