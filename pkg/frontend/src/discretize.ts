/** Three-class discretization, mirrored from the server.
 *
 * Keeping a local copy lets the UI verify every rendered badge against the
 * continuous values in the same payload, with no extra round trip.
 */

import type { Pair, ThresholdPairs, WordPayload } from "./types.js";

export function discretize(value: number, cuts: Pair): 0 | 1 | 2 {
  const [t1, t2] = cuts;
  if (!(t1 >= 0) || !(t2 > t1)) {
    throw new Error(`bad cut points [${t1}, ${t2}]: need 0 <= t1 < t2`);
  }
  if (value < t1) return 0;
  if (value < t2) return 1;
  return 2;
}

/** Badge invariant: every class in the payload must equal a local
 * rediscretization of its continuous value. Returns human-readable
 * descriptions of any violations (empty = consistent). */
export function badgeMismatches(
  words: WordPayload[],
  thresholds: ThresholdPairs,
): string[] {
  const problems: string[] = [];
  words.forEach((word, i) => {
    const p = discretize(word.prominence, thresholds.prominence);
    if (p !== word.p) {
      problems.push(`word ${i} "${word.w}": p badge ${word.p}, expected ${p}`);
    }
    const b = discretize(word.boundary, thresholds.boundary);
    if (b !== word.b) {
      problems.push(`word ${i} "${word.w}": b badge ${word.b}, expected ${b}`);
    }
  });
  return problems;
}
