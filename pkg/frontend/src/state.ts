/** View state and the latest-wins request discipline.
 *
 * Slider drags can fire re-annotation requests faster than the server
 * answers, and responses may arrive out of order. Each request takes a
 * monotonically increasing sequence number; a response renders only if it
 * answers the most recently issued request. A failed request never clears
 * the previous payload.
 */

import type { ConfigData, Pair, UtterancePayload, Weights } from "./types.js";

export class RequestSequencer {
  private counter = 0;
  private latestIssued = 0;

  begin(): number {
    this.latestIssued = ++this.counter;
    return this.latestIssued;
  }

  /** True exactly when seq identifies the newest in-flight request. */
  shouldRender(seq: number): boolean {
    return seq === this.latestIssued;
  }
}

export class ConfigValidationError extends Error {}

export interface ConfigDelta {
  weights?: Partial<Weights>;
  prominence_thresholds?: Pair;
  boundary_thresholds?: Pair;
}

function checkPair(pair: Pair, name: string): void {
  const [t1, t2] = pair;
  if (!(t1 >= 0 && Number.isFinite(t2) && t1 < t2)) {
    throw new ConfigValidationError(
      `${name}: need 0 <= t1 < t2, got [${t1}, ${t2}]`);
  }
}

/** Merge a slider delta into a working config, validating client-side so
 * obviously invalid settings never reach the server. */
export function applyDelta(config: ConfigData, delta: ConfigDelta): ConfigData {
  const weights = { ...config.weights, ...delta.weights };
  for (const [name, value] of Object.entries(weights)) {
    if (!(value >= 0) || !Number.isFinite(value)) {
      throw new ConfigValidationError(`weight ${name} must be >= 0`);
    }
  }
  const prominence = delta.prominence_thresholds ?? config.thresholds.prominence;
  const boundary = delta.boundary_thresholds ?? config.thresholds.boundary;
  checkPair(prominence, "prominence thresholds");
  checkPair(boundary, "boundary thresholds");
  return {
    ...config,
    weights,
    thresholds: { prominence: [...prominence], boundary: [...boundary] },
  };
}

export interface ViewState {
  selectedId: string | null;
  working: ConfigData;
  payload: UtterancePayload | null;
  dirty: boolean;
}

export class UiState {
  readonly sequencer = new RequestSequencer();
  state: ViewState;

  constructor(defaults: ConfigData) {
    this.state = {
      selectedId: null, working: defaults, payload: null, dirty: false,
    };
  }

  select(id: string): void {
    this.state = { ...this.state, selectedId: id };
  }

  /** Returns the new working config; throws on invalid deltas without
   * touching the state. */
  tune(delta: ConfigDelta): ConfigData {
    const working = applyDelta(this.state.working, delta);
    this.state = { ...this.state, working, dirty: true };
    return working;
  }

  /** Accept a response: renders only the latest request's payload. */
  accept(seq: number, payload: UtterancePayload): boolean {
    if (!this.sequencer.shouldRender(seq)) return false;
    this.state = { ...this.state, payload, dirty: false };
    return true;
  }

  /** A failure leaves the last good payload in place. */
  fail(_seq: number): UtterancePayload | null {
    return this.state.payload;
  }
}
