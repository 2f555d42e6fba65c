/** Payload and config shapes exchanged with the HTTP API. */

export interface SeriesPayload {
  values: number[];
  stride: number;
  n_frames: number;
}

export interface WordPayload {
  w: string;
  start: number;
  end: number;
  prominence: number;
  boundary: number;
  p: number;
  b: number;
}

export interface LinePayload {
  strength: number;
  /** [scale index, frame index, amplitude] per tracked extremum. */
  points: [number, number, number][];
}

export interface UtterancePayload {
  id: string;
  config_hash: string;
  frame_period: number;
  duration: number;
  words: WordPayload[];
  signals: {
    f0: SeriesPayload;
    energy: SeriesPayload;
    duration: SeriesPayload;
    prominence: SeriesPayload;
    boundary: SeriesPayload;
  };
  scalogram: {
    periods: number[];
    stride: number;
    values: number[][];
  };
  lines: {
    ridges: LinePayload[];
    valleys: LinePayload[];
  };
}

export interface UtteranceInfo {
  id: string;
  n_words: number;
  duration: number;
}

export type Pair = [number, number];

export interface Weights {
  f0: number;
  energy: number;
  duration: number;
}

export interface ThresholdPairs {
  prominence: Pair;
  boundary: Pair;
}

/** Mirrors the CLI's config file: flat scalars plus two nested tables. */
export interface ConfigData {
  frame_period: number;
  f0_min: number;
  f0_max: number;
  voicing_threshold: number;
  energy_band: number[];
  weights: Weights;
  scales_per_octave: number;
  period_min: number;
  period_max: number;
  word_band: Pair;
  phrase_band: Pair;
  link_window_factor: number;
  thresholds: ThresholdPairs;
  oov_policy: string;
}
