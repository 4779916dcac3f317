/**
 * Host-side merges of workgroup partials. Sums fold in workgroup-index order
 * with 64-bit adds (a partial recombines exactly, so the only rounding is the
 * fold itself); the max pair folds by the lexicographic rule, which makes the
 * selected pair independent of how rows were grouped into workgroups.
 */

import { MaxPairPartials } from "./kernels/simulate.js";

export interface BestPair {
  d2: number;
  i: number;
  j: number;
}

/** Fold pair partials: d2 descending, then lowest i, then lowest j. */
export function mergeMaxPair(partials: MaxPairPartials): BestPair | null {
  const f32 = new Float32Array(partials.buffer);
  const u32 = new Uint32Array(partials.buffer);
  let best: BestPair | null = null;
  for (let w = 0; w < partials.groups; w++) {
    const d2 = f32[w * 4] + f32[w * 4 + 1];
    if (d2 < 0) {
      continue; // sentinel partial from an empty or tail workgroup
    }
    const i = u32[w * 4 + 2];
    const j = u32[w * 4 + 3];
    if (
      best === null ||
      d2 > best.d2 ||
      (d2 === best.d2 && (i < best.i || (i === best.i && j < best.j)))
    ) {
      best = { d2, i, j };
    }
  }
  return best;
}

/** Fold (groups x m) sum pairs into one 64-bit sum per feature. */
export function mergeSum(
  pairs: Float32Array,
  groups: number,
  m: number,
): Float64Array {
  const out = new Float64Array(m);
  for (let w = 0; w < groups; w++) {
    for (let f = 0; f < m; f++) {
      out[f] += pairs[(w * m + f) * 2] + pairs[(w * m + f) * 2 + 1];
    }
  }
  return out;
}

/** Fold (groups x k x m) cluster sums and (groups x k) counts. */
export function mergeClusterSum(
  sums: Float32Array,
  counts: Uint32Array,
  groups: number,
  k: number,
  m: number,
): { sums: Float64Array; counts: Float64Array } {
  const outSums = new Float64Array(k * m);
  const outCounts = new Float64Array(k);
  for (let w = 0; w < groups; w++) {
    for (let c = 0; c < k; c++) {
      for (let f = 0; f < m; f++) {
        outSums[c * m + f] +=
          sums[((w * k + c) * m + f) * 2] + sums[((w * k + c) * m + f) * 2 + 1];
      }
      outCounts[c] += counts[w * k + c];
    }
  }
  return { sums: outSums, counts: outCounts };
}
