/** Pure payload-to-pixels mappings, kept free of DOM so they are testable.
 *
 * The word strip maps continuous prominence to background saturation and
 * boundary strength to separator thickness, both proportional to the
 * utterance maximum. The scalogram maps coefficients onto a diverging
 * palette and line points onto heatmap pixel coordinates.
 */

import type { LinePayload, SeriesPayload } from "./types.js";

function clamp01(v: number): number {
  return v < 0 ? 0 : v > 1 ? 1 : v;
}

/** Proportional intensity in [0, 1]; all-nonpositive input maps to zeros. */
export function proportionalScale(values: number[]): number[] {
  const top = Math.max(...values, 0);
  if (top <= 0) return values.map(() => 0);
  return values.map((v) => clamp01(v / top));
}

/** Separator bar widths in pixels, 1..maxPx, proportional like above. */
export function barWidths(values: number[], maxPx: number): number[] {
  return proportionalScale(values).map((v) => 1 + v * (maxPx - 1));
}

/** Polyline pixel points for one downsampled series. */
export function seriesPath(
  series: SeriesPayload,
  width: number,
  height: number,
): [number, number][] {
  const lo = Math.min(...series.values);
  const hi = Math.max(...series.values);
  const span = hi - lo || 1;
  const lastFrame = Math.max(series.n_frames - 1, 1);
  return series.values.map((v, i) => [
    (Math.min(i * series.stride, lastFrame) / lastFrame) * width,
    height - ((v - lo) / span) * height,
  ]);
}

/** RGBA image for the scalogram, one pixel per cell, diverging palette:
 * negative cells blue, zero white, positive red. */
export function scalogramImage(values: number[][]): {
  pixels: Uint8ClampedArray;
  width: number;
  height: number;
} {
  const height = values.length;
  const width = height > 0 ? (values[0] as number[]).length : 0;
  let top = 0;
  for (const row of values) {
    for (const v of row) top = Math.max(top, Math.abs(v));
  }
  const scale = top || 1;
  const pixels = new Uint8ClampedArray(width * height * 4);
  for (let r = 0; r < height; r += 1) {
    const row = values[r] as number[];
    for (let c = 0; c < width; c += 1) {
      const t = clamp01(Math.abs((row[c] as number) / scale));
      const offset = (r * width + c) * 4;
      if ((row[c] as number) >= 0) {
        pixels[offset] = 255;
        pixels[offset + 1] = Math.round(255 * (1 - t));
        pixels[offset + 2] = Math.round(255 * (1 - t));
      } else {
        pixels[offset] = Math.round(255 * (1 - t));
        pixels[offset + 1] = Math.round(255 * (1 - t));
        pixels[offset + 2] = 255;
      }
      pixels[offset + 3] = 255;
    }
  }
  return { pixels, width, height };
}

/** Map tracked line points onto heatmap pixel coordinates. Row 0 (the
 * shortest period) renders at the top; frames are full-resolution indices
 * and divide by the scalogram stride. */
export function linePath(
  line: LinePayload,
  stride: number,
  nRows: number,
  nCols: number,
  width: number,
  height: number,
): [number, number][] {
  return line.points.map(([scale, frame]) => [
    (Math.min(frame / stride, nCols - 1) / Math.max(nCols - 1, 1)) * width,
    ((scale + 0.5) / nRows) * height,
  ]);
}
