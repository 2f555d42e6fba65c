/** Config file serialization, byte-compatible with the CLI's own output.
 *
 * The CLI accepts this file via --config, so an exported file reproduces
 * the labels currently on screen. Field order and number formatting follow
 * the CLI exactly: floats always carry a decimal point, integers never do.
 */

import type { ConfigData } from "./types.js";

/** Scalar fields in file order; true = serialized as a float. */
const SCALARS: [keyof ConfigData, boolean][] = [
  ["frame_period", true],
  ["f0_min", true],
  ["f0_max", true],
  ["voicing_threshold", true],
  ["energy_band", true],
  ["scales_per_octave", false],
  ["period_min", true],
  ["period_max", true],
  ["word_band", true],
  ["phrase_band", true],
  ["link_window_factor", true],
  ["oov_policy", true],
];

export function formatFloat(value: number): string {
  if (!Number.isFinite(value)) throw new Error(`non-finite value ${value}`);
  return Number.isInteger(value) ? value.toFixed(1) : String(value);
}

function formatValue(value: unknown, float: boolean): string {
  if (typeof value === "number") {
    return float ? formatFloat(value) : String(value);
  }
  if (typeof value === "string") return JSON.stringify(value);
  if (Array.isArray(value)) {
    return "[" + value.map((v) => formatValue(v, float)).join(", ") + "]";
  }
  throw new Error(`cannot serialize ${typeof value}`);
}

export function dumpConfig(config: ConfigData): string {
  const lines = SCALARS.map(
    ([key, float]) => `${key} = ${formatValue(config[key], float)}`,
  );
  lines.push("", "[weights]");
  for (const key of ["f0", "energy", "duration"] as const) {
    lines.push(`${key} = ${formatFloat(config.weights[key])}`);
  }
  lines.push("", "[thresholds]");
  for (const key of ["prominence", "boundary"] as const) {
    lines.push(`${key} = ${formatValue(config.thresholds[key], true)}`);
  }
  return lines.join("\n") + "\n";
}
