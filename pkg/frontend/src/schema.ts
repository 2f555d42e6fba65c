/** Structural validation of API payloads.
 *
 * The server publishes its JSON Schema at /api/schema; this module enforces
 * the same contract in plain code so a malformed or truncated response can
 * never partially render. Errors carry the offending path.
 */

import type {
  ConfigData,
  LinePayload,
  SeriesPayload,
  UtteranceInfo,
  UtterancePayload,
  WordPayload,
} from "./types.js";

export class PayloadError extends Error {
  constructor(path: string, why: string) {
    super(`${path}: ${why}`);
    this.name = "PayloadError";
  }
}

function need(cond: boolean, path: string, why: string): asserts cond {
  if (!cond) throw new PayloadError(path, why);
}

function asRecord(data: unknown, path: string): Record<string, unknown> {
  need(typeof data === "object" && data !== null && !Array.isArray(data),
    path, "expected an object");
  return data as Record<string, unknown>;
}

function asNumber(data: unknown, path: string): number {
  need(typeof data === "number" && Number.isFinite(data),
    path, "expected a finite number");
  return data;
}

function asInt(data: unknown, path: string): number {
  const n = asNumber(data, path);
  need(Number.isInteger(n), path, "expected an integer");
  return n;
}

function asString(data: unknown, path: string): string {
  need(typeof data === "string", path, "expected a string");
  return data;
}

function asArray(data: unknown, path: string): unknown[] {
  need(Array.isArray(data), path, "expected an array");
  return data;
}

function numberArray(data: unknown, path: string): number[] {
  return asArray(data, path).map((v, i) => asNumber(v, `${path}[${i}]`));
}

function validateSeries(data: unknown, path: string): SeriesPayload {
  const obj = asRecord(data, path);
  const series = {
    values: numberArray(obj.values, `${path}.values`),
    stride: asInt(obj.stride, `${path}.stride`),
    n_frames: asInt(obj.n_frames, `${path}.n_frames`),
  };
  need(series.stride >= 1, `${path}.stride`, "must be >= 1");
  need(series.n_frames >= 1, `${path}.n_frames`, "must be >= 1");
  const expected = Math.ceil(series.n_frames / series.stride);
  need(series.values.length === expected, `${path}.values`,
    `expected ${expected} values for n_frames/stride, got ${series.values.length}`);
  return series;
}

function validateWord(data: unknown, path: string): WordPayload {
  const obj = asRecord(data, path);
  const word = {
    w: asString(obj.w, `${path}.w`),
    start: asNumber(obj.start, `${path}.start`),
    end: asNumber(obj.end, `${path}.end`),
    prominence: asNumber(obj.prominence, `${path}.prominence`),
    boundary: asNumber(obj.boundary, `${path}.boundary`),
    p: asInt(obj.p, `${path}.p`),
    b: asInt(obj.b, `${path}.b`),
  };
  need(word.p >= 0 && word.p <= 2, `${path}.p`, "class must be 0..2");
  need(word.b >= 0 && word.b <= 2, `${path}.b`, "class must be 0..2");
  need(word.end > word.start, `${path}`, "end must exceed start");
  return word;
}

function validateLine(data: unknown, path: string): LinePayload {
  const obj = asRecord(data, path);
  const points = asArray(obj.points, `${path}.points`).map((p, i) => {
    const triple = asArray(p, `${path}.points[${i}]`);
    need(triple.length === 3, `${path}.points[${i}]`,
      "expected [scale, frame, amplitude]");
    return [
      asInt(triple[0], `${path}.points[${i}][0]`),
      asInt(triple[1], `${path}.points[${i}][1]`),
      asNumber(triple[2], `${path}.points[${i}][2]`),
    ] as [number, number, number];
  });
  need(points.length >= 1, `${path}.points`, "must not be empty");
  return { strength: asNumber(obj.strength, `${path}.strength`), points };
}

const SIGNAL_NAMES = ["f0", "energy", "duration", "prominence", "boundary"] as const;

export function validatePayload(data: unknown): UtterancePayload {
  const obj = asRecord(data, "payload");
  const id = asString(obj.id, "payload.id");
  const hash = asString(obj.config_hash, "payload.config_hash");
  need(/^[0-9a-f]{12}$/.test(hash), "payload.config_hash",
    "expected 12 hex characters");
  const framePeriod = asNumber(obj.frame_period, "payload.frame_period");
  need(framePeriod > 0, "payload.frame_period", "must be positive");
  const duration = asNumber(obj.duration, "payload.duration");
  need(duration > 0, "payload.duration", "must be positive");

  need("words" in obj, "payload.words", "missing");
  const words = asArray(obj.words, "payload.words")
    .map((w, i) => validateWord(w, `payload.words[${i}]`));

  const signalsObj = asRecord(obj.signals, "payload.signals");
  const signals = {} as UtterancePayload["signals"];
  for (const name of SIGNAL_NAMES) {
    signals[name] = validateSeries(signalsObj[name], `payload.signals.${name}`);
  }

  const sc = asRecord(obj.scalogram, "payload.scalogram");
  const periods = numberArray(sc.periods, "payload.scalogram.periods");
  const stride = asInt(sc.stride, "payload.scalogram.stride");
  need(stride >= 1, "payload.scalogram.stride", "must be >= 1");
  const rows = asArray(sc.values, "payload.scalogram.values")
    .map((row, i) => numberArray(row, `payload.scalogram.values[${i}]`));
  need(rows.length === periods.length, "payload.scalogram.values",
    `expected ${periods.length} rows, got ${rows.length}`);

  const linesObj = asRecord(obj.lines, "payload.lines");
  const lines = {
    ridges: asArray(linesObj.ridges, "payload.lines.ridges")
      .map((l, i) => validateLine(l, `payload.lines.ridges[${i}]`)),
    valleys: asArray(linesObj.valleys, "payload.lines.valleys")
      .map((l, i) => validateLine(l, `payload.lines.valleys[${i}]`)),
  };

  return {
    id, config_hash: hash, frame_period: framePeriod, duration, words,
    signals, scalogram: { periods, stride, values: rows }, lines,
  };
}

export function validateUtteranceList(data: unknown): UtteranceInfo[] {
  return asArray(data, "utterances").map((row, i) => {
    const obj = asRecord(row, `utterances[${i}]`);
    return {
      id: asString(obj.id, `utterances[${i}].id`),
      n_words: asInt(obj.n_words, `utterances[${i}].n_words`),
      duration: asNumber(obj.duration, `utterances[${i}].duration`),
    };
  });
}

function pair(data: unknown, path: string): [number, number] {
  const arr = numberArray(data, path);
  need(arr.length === 2, path, "expected exactly two numbers");
  return [arr[0] as number, arr[1] as number];
}

export function validateConfig(data: unknown): ConfigData {
  const obj = asRecord(data, "config");
  const weights = asRecord(obj.weights, "config.weights");
  const thresholds = asRecord(obj.thresholds, "config.thresholds");
  return {
    frame_period: asNumber(obj.frame_period, "config.frame_period"),
    f0_min: asNumber(obj.f0_min, "config.f0_min"),
    f0_max: asNumber(obj.f0_max, "config.f0_max"),
    voicing_threshold: asNumber(obj.voicing_threshold,
      "config.voicing_threshold"),
    energy_band: numberArray(obj.energy_band, "config.energy_band"),
    weights: {
      f0: asNumber(weights.f0, "config.weights.f0"),
      energy: asNumber(weights.energy, "config.weights.energy"),
      duration: asNumber(weights.duration, "config.weights.duration"),
    },
    scales_per_octave: asInt(obj.scales_per_octave,
      "config.scales_per_octave"),
    period_min: asNumber(obj.period_min, "config.period_min"),
    period_max: asNumber(obj.period_max, "config.period_max"),
    word_band: pair(obj.word_band, "config.word_band"),
    phrase_band: pair(obj.phrase_band, "config.phrase_band"),
    link_window_factor: asNumber(obj.link_window_factor,
      "config.link_window_factor"),
    thresholds: {
      prominence: pair(thresholds.prominence, "config.thresholds.prominence"),
      boundary: pair(thresholds.boundary, "config.thresholds.boundary"),
    },
    oov_policy: asString(obj.oov_policy, "config.oov_policy"),
  };
}
