// Boundary underlay helpers. The grey mapping mirrors the server's static
// figures: white at zero uncertainty, 40% grey at the maximum 1 - 1/K.

import { BoundaryPayload } from "./api.js";

export function greyLevel(u: number, nClasses: number): number {
  const umax = 1 - 1 / Math.max(nClasses, 1);
  const frac = umax <= 0 ? 0 : Math.min(Math.max(u / umax, 0), 1);
  return Math.round(255 - 102 * frac);
}

export function distinctClassCount(payload: BoundaryPayload): number {
  const seen = new Set<string>();
  for (const row of payload.labels) {
    for (const label of row) {
      seen.add(label);
    }
  }
  return seen.size;
}

/** Paint the raster and boundary segments onto a canvas context. */
export function paintBoundary(ctx: CanvasRenderingContext2D,
                              payload: BoundaryPayload, width: number,
                              height: number): void {
  const k = distinctClassCount(payload);
  const g = payload.grid;
  const cw = width / g;
  const ch = height / g;
  for (let j = 0; j < g; j++) {
    for (let i = 0; i < g; i++) {
      const level = greyLevel(payload.uncertainty[j][i], k);
      ctx.fillStyle = `rgb(${level},${level},${level})`;
      // row j is the j-th cell from the bottom in data space
      ctx.fillRect(i * cw, height - (j + 1) * ch, cw + 0.5, ch + 0.5);
    }
  }
  const sx = (x: number) =>
    ((x - payload.x0) / (payload.x1 - payload.x0)) * width;
  const sy = (y: number) =>
    height - ((y - payload.y0) / (payload.y1 - payload.y0)) * height;
  ctx.strokeStyle = "#222";
  ctx.lineWidth = 1.4;
  for (const [p1, p2] of payload.segments) {
    ctx.beginPath();
    ctx.moveTo(sx(p1[0]), sy(p1[1]));
    ctx.lineTo(sx(p2[0]), sy(p2[1]));
    ctx.stroke();
  }
}
