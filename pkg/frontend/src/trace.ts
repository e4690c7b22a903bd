// LR-versus-lambda line chart with an argmax marker; clicking the chart
// maps the x position back to the nearest grid lambda.

import { LrPayload } from "./api.js";

const MARGIN = 30;

export function renderTraceSvg(trace: LrPayload, currentLambda: number,
                               width = 320, height = 160): string {
  const lo = Math.min(...trace.lr_values);
  const hi = Math.max(...trace.lr_values);
  const span = Math.max(hi - lo, 1e-9);
  const sx = (lam: number) => MARGIN + lam * (width - 2 * MARGIN);
  const sy = (v: number) =>
    height - MARGIN - ((v - lo) / span) * (height - 2 * MARGIN);
  const pts = trace.grid
    .map((lam, i) => `${sx(lam).toFixed(1)},${sy(trace.lr_values[i]).toFixed(1)}`)
    .join(" ");
  const argmaxY = sy(trace.lr_values[trace.grid.indexOf(trace.argmax_lambda)]
                     ?? hi);
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
    `height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect x="${MARGIN}" y="${MARGIN}" width="${width - 2 * MARGIN}" ` +
    `height="${height - 2 * MARGIN}" fill="none" stroke="#444"/>`,
    `<polyline points="${pts}" fill="none" stroke="#0072B2" ` +
    `stroke-width="1.5"/>`,
    `<circle cx="${sx(trace.argmax_lambda).toFixed(1)}" ` +
    `cy="${argmaxY.toFixed(1)}" r="4" fill="#D55E00"/>`,
    `<line x1="${sx(currentLambda).toFixed(1)}" y1="${MARGIN}" ` +
    `x2="${sx(currentLambda).toFixed(1)}" y2="${height - MARGIN}" ` +
    `stroke="#999" stroke-dasharray="3,3"/>`,
    `<text x="${width / 2}" y="${height - 8}" text-anchor="middle" ` +
    `font-size="11">lambda (argmax ${trace.argmax_lambda.toFixed(2)})</text>`,
    `</svg>`,
  ].join("");
}

/** Nearest grid lambda for a click at pixel x inside a chart of a width. */
export function lambdaAtClick(x: number, width: number,
                              trace: LrPayload): number {
  const frac = (x - MARGIN) / (width - 2 * MARGIN);
  const lam = Math.min(1, Math.max(0, frac));
  let best = trace.grid[0];
  let dist = Infinity;
  for (const g of trace.grid) {
    const d = Math.abs(g - lam);
    if (d < dist) {
      dist = d;
      best = g;
    }
  }
  return best;
}
