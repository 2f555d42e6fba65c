/** Canvas and DOM drawing for the three panels. */

import { discretize } from "./discretize.js";
import type { ThresholdPairs, UtterancePayload } from "./types.js";
import {
  barWidths,
  linePath,
  proportionalScale,
  scalogramImage,
  seriesPath,
} from "./viewmodel.js";

function strokePath(
  ctx: CanvasRenderingContext2D,
  points: [number, number][],
  style: string,
  widthPx: number,
  dash: number[] = [],
): void {
  if (points.length === 0) return;
  ctx.save();
  ctx.strokeStyle = style;
  ctx.lineWidth = widthPx;
  ctx.setLineDash(dash);
  ctx.beginPath();
  const [x0, y0] = points[0] as [number, number];
  ctx.moveTo(x0, y0);
  for (const [x, y] of points.slice(1)) ctx.lineTo(x, y);
  if (points.length === 1) ctx.lineTo(x0 + 0.5, y0);
  ctx.stroke();
  ctx.restore();
}

export function drawSignals(
  canvas: HTMLCanvasElement,
  payload: UtterancePayload,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#ffffff";
  ctx.fillRect(0, 0, width, height);

  // word start/end ticks behind the traces
  ctx.strokeStyle = "#e3e3e3";
  ctx.lineWidth = 1;
  for (const word of payload.words) {
    for (const t of [word.start, word.end]) {
      const x = (t / payload.duration) * width;
      ctx.beginPath();
      ctx.moveTo(x, 0);
      ctx.lineTo(x, height);
      ctx.stroke();
    }
  }

  strokePath(ctx, seriesPath(payload.signals.prominence, width, height),
    "#b03030", 2);
  strokePath(ctx, seriesPath(payload.signals.boundary, width, height),
    "#3050b0", 2, [6, 4]);
}

export function drawScalogram(
  canvas: HTMLCanvasElement,
  payload: UtterancePayload,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);

  const image = scalogramImage(payload.scalogram.values);
  if (image.width === 0 || image.height === 0) return;

  // paint at cell resolution, then upscale onto the display canvas
  const cells = document.createElement("canvas");
  cells.width = image.width;
  cells.height = image.height;
  const cellCtx = cells.getContext("2d");
  if (!cellCtx) return;
  const cellImage = cellCtx.createImageData(image.width, image.height);
  cellImage.data.set(image.pixels);
  cellCtx.putImageData(cellImage, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(cells, 0, 0, width, height);

  const nRows = payload.scalogram.values.length;
  const nCols = image.width;
  const stride = payload.scalogram.stride;
  for (const ridge of payload.lines.ridges) {
    strokePath(ctx, linePath(ridge, stride, nRows, nCols, width, height),
      "rgba(40, 10, 10, 0.85)", 2);
  }
  for (const valley of payload.lines.valleys) {
    strokePath(ctx, linePath(valley, stride, nRows, nCols, width, height),
      "rgba(245, 245, 245, 0.9)", 2, [4, 3]);
  }
}

export function renderWordStrip(
  container: HTMLElement,
  payload: UtterancePayload,
  thresholds: ThresholdPairs,
): void {
  container.textContent = "";
  const saturation = proportionalScale(
    payload.words.map((w) => w.prominence));
  const widths = barWidths(payload.words.map((w) => w.boundary), 10);

  payload.words.forEach((word, i) => {
    const cell = document.createElement("span");
    cell.className = "word";
    cell.style.backgroundColor =
      `hsla(28, 90%, 55%, ${(saturation[i] as number).toFixed(3)})`;

    const text = document.createElement("span");
    text.textContent = word.w;
    cell.appendChild(text);

    const badges = document.createElement("sup");
    badges.className = "badges";
    badges.textContent =
      `<p${discretize(word.prominence, thresholds.prominence)}>` +
      `<b${discretize(word.boundary, thresholds.boundary)}>`;
    cell.appendChild(badges);
    container.appendChild(cell);

    const bar = document.createElement("span");
    bar.className = "boundary-bar";
    bar.style.width = `${(widths[i] as number).toFixed(1)}px`;
    container.appendChild(bar);
  });
}
