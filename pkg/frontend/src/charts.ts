// Minimal canvas rendering for trends, the reward contour, and the
// prediction overlay. The payload schemas are the contract; this layer is
// presentation only.

import type { TrendBuffer } from "./store.js";
import type { ContourModel, OverlayModel } from "./view.js";

function prepare(canvas: HTMLCanvasElement): CanvasRenderingContext2D {
  const ctx = canvas.getContext("2d")!;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  return ctx;
}

export function drawTrend(
  canvas: HTMLCanvasElement,
  buffer: TrendBuffer,
  color = "#2b7de9",
  limit?: number,
): void {
  const ctx = prepare(canvas);
  const pts = buffer.values();
  if (pts.length < 2) return;
  const t0 = pts[0].t;
  const t1 = pts[pts.length - 1].t;
  let lo = Infinity;
  let hi = -Infinity;
  for (const p of pts) {
    lo = Math.min(lo, p.value);
    hi = Math.max(hi, p.value);
  }
  if (limit !== undefined) hi = Math.max(hi, limit);
  const pad = 0.08 * (hi - lo || 1);
  lo -= pad;
  hi += pad;
  const x = (t: number) =>
    ((t - t0) / Math.max(t1 - t0, 1)) * (canvas.width - 8) + 4;
  const y = (v: number) =>
    canvas.height - ((v - lo) / (hi - lo)) * (canvas.height - 8) - 4;
  if (limit !== undefined) {
    ctx.strokeStyle = "#d04040";
    ctx.setLineDash([4, 3]);
    ctx.beginPath();
    ctx.moveTo(0, y(limit));
    ctx.lineTo(canvas.width, y(limit));
    ctx.stroke();
    ctx.setLineDash([]);
  }
  ctx.strokeStyle = color;
  ctx.beginPath();
  let pen = false;
  for (const p of pts) {
    if (p.resync) pen = false; // draw a visible gap at stream drops
    if (!pen) {
      ctx.moveTo(x(p.t), y(p.value));
      pen = true;
    } else {
      ctx.lineTo(x(p.t), y(p.value));
    }
  }
  ctx.stroke();
}

export function drawContour(canvas: HTMLCanvasElement, model: ContourModel): void {
  const ctx = prepare(canvas);
  const ny = model.y.length;
  const nx = model.x.length;
  if (!nx || !ny) return;
  const cw = canvas.width / nx;
  const ch = canvas.height / ny;
  const span = model.zMax - model.zMin || 1;
  for (let i = 0; i < ny; i++) {
    for (let j = 0; j < nx; j++) {
      const v = model.z[i]?.[j];
      if (v === null || v === undefined) continue;
      const f = (v - model.zMin) / span;
      const hue = 240 - 240 * f; // blue (low) to red (high)
      ctx.fillStyle = `hsl(${hue}, 70%, ${35 + 25 * f}%)`;
      ctx.fillRect(j * cw, canvas.height - (i + 1) * ch, cw + 0.5, ch + 0.5);
    }
  }
}

export function drawOverlay(canvas: HTMLCanvasElement, model: OverlayModel): void {
  const ctx = prepare(canvas);
  const { times, pfcl, limit } = model;
  if (times.length < 2) return;
  let lo = Math.min(...pfcl);
  let hi = Math.max(Math.max(...pfcl), limit);
  const pad = 0.08 * (hi - lo || 1);
  lo -= pad;
  hi += pad;
  const x = (t: number) =>
    ((t - times[0]) / (times[times.length - 1] - times[0])) *
      (canvas.width - 8) + 4;
  const y = (v: number) =>
    canvas.height - ((v - lo) / (hi - lo)) * (canvas.height - 8) - 4;
  ctx.strokeStyle = "#d04040";
  ctx.setLineDash([4, 3]);
  ctx.beginPath();
  ctx.moveTo(0, y(limit));
  ctx.lineTo(canvas.width, y(limit));
  ctx.stroke();
  ctx.setLineDash([]);
  ctx.strokeStyle = model.exceedsLimit ? "#d07000" : "#2b9944";
  ctx.beginPath();
  ctx.moveTo(x(times[0]), y(pfcl[0]));
  for (let i = 1; i < times.length; i++) ctx.lineTo(x(times[i]), y(pfcl[i]));
  ctx.stroke();
}
