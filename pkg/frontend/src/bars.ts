// Eigenvalue bars with the location/dispersion split stacked inside each
// bar; values are rendered exactly as the server reported them.

import { ProjectionPayload } from "./api.js";

export const LOC_COLOR = "#4878a8";
export const DISP_COLOR = "#c27f4e";

export interface BarSpec {
  name: string;
  eigenvalue: number;
  locFraction: number;
  dispFraction: number;
}

export function barSpecs(payload: ProjectionPayload): BarSpec[] {
  return payload.eigenvalues.map((v, j) => {
    const loc = payload.loc_part[j] ?? 0;
    const disp = payload.disp_part[j] ?? 0;
    const total = loc + disp;
    return {
      name: `Dir_${j + 1}`,
      eigenvalue: v,
      locFraction: total > 0 ? loc / total : 0,
      dispFraction: total > 0 ? disp / total : 0,
    };
  });
}

export function renderBarsSvg(payload: ProjectionPayload, width = 260,
                              height = 150): string {
  const specs = barSpecs(payload);
  const top = Math.max(...payload.eigenvalues, 1e-12);
  const margin = 24;
  const bw = (width - 2 * margin) / Math.max(specs.length, 1);
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
    `height="${height}" viewBox="0 0 ${width} ${height}">`,
  ];
  specs.forEach((spec, j) => {
    const h = ((height - 2 * margin) * spec.eigenvalue) / top;
    const x = margin + j * bw + bw * 0.15;
    const y = height - margin - h;
    const locH = h * spec.locFraction;
    const dispH = h - locH;
    parts.push(`<rect x="${x.toFixed(1)}" y="${(y + dispH).toFixed(1)}" ` +
      `width="${(bw * 0.7).toFixed(1)}" height="${locH.toFixed(1)}" ` +
      `fill="${LOC_COLOR}"><title>${spec.name} location</title></rect>`);
    parts.push(`<rect x="${x.toFixed(1)}" y="${y.toFixed(1)}" ` +
      `width="${(bw * 0.7).toFixed(1)}" height="${dispH.toFixed(1)}" ` +
      `fill="${DISP_COLOR}"><title>${spec.name} dispersion</title></rect>`);
    parts.push(`<text x="${(x + bw * 0.35).toFixed(1)}" ` +
      `y="${height - margin + 14}" text-anchor="middle" font-size="11">` +
      `${spec.name}</text>`);
    parts.push(`<text x="${(x + bw * 0.35).toFixed(1)}" ` +
      `y="${(y - 4).toFixed(1)}" text-anchor="middle" font-size="10">` +
      `${spec.eigenvalue.toFixed(3)}</text>`);
  });
  parts.push("</svg>");
  return parts.join("");
}
