/** Shared sample objects mirroring real API responses. */

import type { ConfigData, UtterancePayload } from "../src/types.js";

export function defaultConfig(): ConfigData {
  return {
    frame_period: 0.005,
    f0_min: 60.0,
    f0_max: 400.0,
    voicing_threshold: 0.45,
    energy_band: [],
    weights: { f0: 1.0, energy: 0.5, duration: 1.0 },
    scales_per_octave: 2,
    period_min: 0.08,
    period_max: 5.12,
    word_band: [0.16, 1.28],
    phrase_band: [0.64, 5.12],
    link_window_factor: 0.5,
    thresholds: { prominence: [0.4, 1.0], boundary: [0.35, 0.9] },
    oov_policy: "graphemes",
  };
}

export function samplePayload(): UtterancePayload {
  const series = (values: number[]) => ({
    values, stride: 1, n_frames: values.length,
  });
  return {
    id: "fix0001",
    config_hash: "0123456789ab",
    frame_period: 0.005,
    duration: 0.02,
    words: [
      { w: "one", start: 0.0, end: 0.01, prominence: 0.2, boundary: 0.1,
        p: 0, b: 0 },
      { w: "two", start: 0.01, end: 0.02, prominence: 1.4, boundary: 0.95,
        p: 2, b: 2 },
    ],
    signals: {
      f0: series([0, 1, 2, 3]),
      energy: series([1, 1, 2, 2]),
      duration: series([0, 0, 1, 1]),
      prominence: series([0.1, 0.2, 1.4, 0.3]),
      boundary: series([0.0, 0.1, 0.9, 0.2]),
    },
    scalogram: {
      periods: [0.08, 0.16],
      stride: 1,
      values: [[0, 0.5, -0.5, 0], [1, 0, 0, -1]],
    },
    lines: {
      ridges: [{ strength: 1.4, points: [[0, 2, 0.5], [1, 2, 0.8]] }],
      valleys: [{ strength: 0.9, points: [[0, 3, -0.4]] }],
    },
  };
}

/** Deep-clone helper so tests can corrupt copies freely. */
export function asJson(value: unknown): unknown {
  return JSON.parse(JSON.stringify(value));
}
