/**
 * CPU model of the WGSL kernels, bit for bit: same workgroup decomposition,
 * same split-float formulas (one Math.fround per shader operation), same
 * binary tree over shared memory, and the same packed partial layouts a
 * device readback would produce. The test suite runs against this model, and
 * the GPU engine merges its readbacks with the identical host-side code, so
 * anything proved here transfers to hardware up to the device's own f32
 * rounding latitude.
 */

import { F32x2, DF_ZERO, dfAdd, dfSub, dfSqr } from "../f32x2.js";

/** Workgroups needed for `count` invocations (zero for an empty range). */
export function workgroupCount(count: number, workgroupSize: number): number {
  return Math.ceil(count / workgroupSize);
}

function checkWorkgroupSize(workgroupSize: number): void {
  if (
    !Number.isInteger(workgroupSize) ||
    workgroupSize < 1 ||
    (workgroupSize & (workgroupSize - 1)) !== 0
  ) {
    throw new Error(`workgroup size must be a power of two, got ${workgroupSize}`);
  }
}

function readPair(coords: Float32Array, slot: number): F32x2 {
  return [coords[2 * slot], coords[2 * slot + 1]];
}

/** Squared distance between rows i and j in split-float arithmetic. */
export function rowDist2(
  coords: Float32Array,
  m: number,
  i: number,
  j: number,
): F32x2 {
  let acc: F32x2 = DF_ZERO;
  for (let f = 0; f < m; f++) {
    const d = dfSub(readPair(coords, i * m + f), readPair(coords, j * m + f));
    acc = dfAdd(acc, dfSqr(d));
  }
  return acc;
}

function dfLess(a: F32x2, b: F32x2): boolean {
  return a[0] < b[0] || (a[0] === b[0] && a[1] < b[1]);
}

/** 16 bytes per workgroup: (d2 hi, d2 lo, i, j), the PairPartial layout. */
export interface MaxPairPartials {
  groups: number;
  buffer: ArrayBuffer;
}

/**
 * Run the max-pair kernel over a row set: each invocation scans its row i
 * against every j > i, then the workgroup tree-reduces by (d2 desc, i asc,
 * j asc). Empty invocations hold the d2 = -1 sentinel.
 */
export function simulateMaxPair(
  coords: Float32Array,
  n: number,
  m: number,
  rows: Uint32Array,
  workgroupSize: number,
): MaxPairPartials {
  checkWorkgroupSize(workgroupSize);
  const groups = workgroupCount(rows.length, workgroupSize);
  const buffer = new ArrayBuffer(groups * 16);
  const f32 = new Float32Array(buffer);
  const u32 = new Uint32Array(buffer);

  const sD2: F32x2[] = new Array(workgroupSize);
  const sI = new Uint32Array(workgroupSize);
  const sJ = new Uint32Array(workgroupSize);

  for (let w = 0; w < groups; w++) {
    for (let t = 0; t < workgroupSize; t++) {
      const g = w * workgroupSize + t;
      let bestD2: F32x2 = [-1, 0];
      let bestI = 0;
      let bestJ = 0;
      if (g < rows.length) {
        const i = rows[g];
        bestI = i;
        for (let j = i + 1; j < n; j++) {
          const d2 = rowDist2(coords, m, i, j);
          if (dfLess(bestD2, d2)) {
            bestD2 = d2;
            bestJ = j;
          }
        }
      }
      sD2[t] = bestD2;
      sI[t] = bestI;
      sJ[t] = bestJ;
    }
    for (let off = workgroupSize >> 1; off > 0; off >>= 1) {
      for (let t = 0; t < off; t++) {
        const take =
          dfLess(sD2[t], sD2[t + off]) ||
          (!dfLess(sD2[t + off], sD2[t]) &&
            (sI[t + off] < sI[t] ||
              (sI[t + off] === sI[t] && sJ[t + off] < sJ[t])));
        if (take) {
          sD2[t] = sD2[t + off];
          sI[t] = sI[t + off];
          sJ[t] = sJ[t + off];
        }
      }
    }
    f32[w * 4] = sD2[0][0];
    f32[w * 4 + 1] = sD2[0][1];
    u32[w * 4 + 2] = sI[0];
    u32[w * 4 + 3] = sJ[0];
  }
  return { groups, buffer };
}

/**
 * Run the coordinate-sum kernel over rows [start, start + count): per
 * feature, leaves fill shared memory (zero past the range) and a binary tree
 * folds them. Returns the packed (groups x m) pair buffer.
 */
export function simulateSum(
  coords: Float32Array,
  m: number,
  start: number,
  count: number,
  workgroupSize: number,
): { groups: number; pairs: Float32Array } {
  checkWorkgroupSize(workgroupSize);
  const groups = workgroupCount(count, workgroupSize);
  const pairs = new Float32Array(groups * m * 2);
  const sAcc: F32x2[] = new Array(workgroupSize);

  for (let w = 0; w < groups; w++) {
    for (let f = 0; f < m; f++) {
      for (let t = 0; t < workgroupSize; t++) {
        const g = w * workgroupSize + t;
        sAcc[t] = g < count ? readPair(coords, (start + g) * m + f) : DF_ZERO;
      }
      for (let off = workgroupSize >> 1; off > 0; off >>= 1) {
        for (let t = 0; t < off; t++) {
          sAcc[t] = dfAdd(sAcc[t], sAcc[t + off]);
        }
      }
      pairs[(w * m + f) * 2] = sAcc[0][0];
      pairs[(w * m + f) * 2 + 1] = sAcc[0][1];
    }
  }
  return { groups, pairs };
}

export interface ClusterSumPartials {
  groups: number;
  /** (groups x k x m) pairs. */
  sums: Float32Array;
  /** (groups x k) counts. */
  counts: Uint32Array;
  /** Set when any in-range label fell outside [0, k). */
  badLabel: boolean;
}

/**
 * Run the cluster-sum kernel: per cluster, a masked tree reduction fills the
 * workgroup-local bin for each feature, then one more fills the count. An
 * out-of-range label raises the job flag and contributes to no bin.
 */
export function simulateClusterSum(
  coords: Float32Array,
  labels: Uint32Array,
  m: number,
  k: number,
  start: number,
  count: number,
  workgroupSize: number,
): ClusterSumPartials {
  checkWorkgroupSize(workgroupSize);
  const groups = workgroupCount(count, workgroupSize);
  const sums = new Float32Array(groups * k * m * 2);
  const counts = new Uint32Array(groups * k);
  let badLabel = false;

  const sAcc: F32x2[] = new Array(workgroupSize);
  const sCnt = new Uint32Array(workgroupSize);

  for (let w = 0; w < groups; w++) {
    for (let c = 0; c < k; c++) {
      for (let f = 0; f < m; f++) {
        for (let t = 0; t < workgroupSize; t++) {
          const g = w * workgroupSize + t;
          let leaf: F32x2 = DF_ZERO;
          if (g < count) {
            const label = labels[start + g];
            if (label >= k) {
              badLabel = true;
            } else if (label === c) {
              leaf = readPair(coords, (start + g) * m + f);
            }
          }
          sAcc[t] = leaf;
        }
        for (let off = workgroupSize >> 1; off > 0; off >>= 1) {
          for (let t = 0; t < off; t++) {
            sAcc[t] = dfAdd(sAcc[t], sAcc[t + off]);
          }
        }
        sums[((w * k + c) * m + f) * 2] = sAcc[0][0];
        sums[((w * k + c) * m + f) * 2 + 1] = sAcc[0][1];
      }

      for (let t = 0; t < workgroupSize; t++) {
        const g = w * workgroupSize + t;
        sCnt[t] = g < count && labels[start + g] === c ? 1 : 0;
      }
      for (let off = workgroupSize >> 1; off > 0; off >>= 1) {
        for (let t = 0; t < off; t++) {
          sCnt[t] = sCnt[t] + sCnt[t + off];
        }
      }
      counts[w * k + c] = sCnt[0];
    }
  }
  return { groups, sums, counts, badLabel };
}
