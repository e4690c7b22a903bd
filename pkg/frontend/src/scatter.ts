// Scatter rendering. All numerical work on the client is limited to the
// affine data-to-screen mapping; coordinates, eigenvalues and splits come
// from the server payload untouched.

import { ProjectionPayload } from "./api.js";

export const PALETTE = ["#0072B2", "#D55E00", "#009E73", "#CC79A7",
                        "#E69F00", "#56B4E9", "#F0E442", "#000000"];
export const GLYPHS = ["circle", "square", "triangle", "diamond"];

export interface Box {
  x0: number;
  x1: number;
  y0: number;
  y1: number;
}

export interface ScreenPoint {
  x: number;
  y: number;
  label: string;
  color: string;
  glyph: string;
  uncertainty: number;
  hidden: boolean;
}

export function classOrder(payload: ProjectionPayload): string[] {
  return [...new Set(payload.points.map((p) => p.label))].sort();
}

export function classStyle(classes: string[]):
    Map<string, { color: string; glyph: string }> {
  const style = new Map<string, { color: string; glyph: string }>();
  classes.forEach((c, i) => {
    style.set(c, { color: PALETTE[i % PALETTE.length],
                   glyph: GLYPHS[i % GLYPHS.length] });
  });
  return style;
}

export function dataBox(payload: ProjectionPayload, pad = 0.1): Box {
  let x0 = Infinity, x1 = -Infinity, y0 = Infinity, y1 = -Infinity;
  for (const p of payload.points) {
    x0 = Math.min(x0, p.z1);
    x1 = Math.max(x1, p.z1);
    y0 = Math.min(y0, p.z2);
    y1 = Math.max(y1, p.z2);
  }
  const sx = Math.max(x1 - x0, 1e-9);
  const sy = Math.max(y1 - y0, 1e-9);
  return { x0: x0 - pad * sx, x1: x1 + pad * sx,
           y0: y0 - pad * sy, y1: y1 + pad * sy };
}

export function axisAnnotations(payload: ProjectionPayload): string[] {
  const total = payload.eigenvalues.reduce((a, b) => a + b, 0);
  return payload.eigenvalues.map((v, j) => {
    const share = total > 0 ? (100 * v) / total : 0;
    return `Dir_${j + 1} (${share.toFixed(1)}%)`;
  });
}

export function screenPoints(payload: ProjectionPayload, box: Box,
                             width: number, height: number, margin: number,
                             hidden: Set<string>): ScreenPoint[] {
  const classes = classOrder(payload);
  const style = classStyle(classes);
  return payload.points.map((p) => {
    const s = style.get(p.label) ?? { color: "#555555", glyph: "circle" };
    return {
      x: margin + ((p.z1 - box.x0) / (box.x1 - box.x0)) * (width - 2 * margin),
      y: height - margin
        - ((p.z2 - box.y0) / (box.y1 - box.y0)) * (height - 2 * margin),
      label: p.label,
      color: s.color,
      glyph: s.glyph,
      uncertainty: p.uncertainty,
      hidden: hidden.has(p.label),
    };
  });
}

function glyphMarkup(pt: ScreenPoint, size = 3.5): string {
  const { color, glyph } = pt;
  if (glyph === "square") {
    return `<rect x="${-size}" y="${-size}" width="${2 * size}" ` +
      `height="${2 * size}" fill="${color}" fill-opacity="0.8"/>`;
  }
  if (glyph === "triangle") {
    const s = size * 1.3;
    return `<polygon points="0,${-s} ${-s},${s} ${s},${s}" ` +
      `fill="${color}" fill-opacity="0.8"/>`;
  }
  if (glyph === "diamond") {
    const s = size * 1.4;
    return `<polygon points="0,${-s} ${s},0 0,${s} ${-s},0" ` +
      `fill="${color}" fill-opacity="0.8"/>`;
  }
  return `<circle r="${size}" fill="${color}" fill-opacity="0.8"/>`;
}

export function renderScatterSvg(payload: ProjectionPayload,
                                 hidden: Set<string>, width = 640,
                                 height = 480, margin = 46): string {
  const box = dataBox(payload);
  const pts = screenPoints(payload, box, width, height, margin, hidden);
  const axes = axisAnnotations(payload);
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
    `height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect x="${margin}" y="${margin}" width="${width - 2 * margin}" ` +
    `height="${height - 2 * margin}" fill="none" stroke="#444"/>`,
  ];
  pts.forEach((pt, i) => {
    if (pt.hidden) {
      return;
    }
    parts.push(`<g class="pt" data-index="${i}" ` +
      `transform="translate(${pt.x.toFixed(2)} ${pt.y.toFixed(2)})">` +
      glyphMarkup(pt) + `</g>`);
  });
  parts.push(`<text x="${width / 2}" y="${height - 10}" ` +
    `text-anchor="middle" font-size="13">${axes[0] ?? "Dir_1"}</text>`);
  parts.push(`<text x="14" y="${height / 2}" text-anchor="middle" ` +
    `font-size="13" transform="rotate(-90 14 ${height / 2})">` +
    `${axes[1] ?? ""}</text>`);
  parts.push("</svg>");
  return parts.join("");
}
