/**
 * Test helpers: a seeded PRNG and plain 64-bit host oracles for every
 * reduction, written directly against the f64 coordinate values the kernels
 * only ever see through their split representation.
 */

/** Deterministic 32-bit PRNG (mulberry32), uniform in [0, 1). */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Row-major n x m coordinates, roughly centered, full f64 mantissas. */
export function randomCoords(
  rand: () => number,
  n: number,
  m: number,
  scale = 10,
): Float64Array {
  const coords = new Float64Array(n * m);
  for (let e = 0; e < coords.length; e++) {
    coords[e] = (rand() - 0.5) * 2 * scale;
  }
  return coords;
}

export function randomLabels(
  rand: () => number,
  n: number,
  k: number,
): Uint32Array {
  const labels = new Uint32Array(n);
  for (let s = 0; s < n; s++) {
    labels[s] = Math.floor(rand() * k);
  }
  return labels;
}

/** 64-bit per-feature sums over rows [start, stop). */
export function sumOracle(
  coords: Float64Array,
  m: number,
  start: number,
  stop: number,
): Float64Array {
  const out = new Float64Array(m);
  for (let s = start; s < stop; s++) {
    for (let f = 0; f < m; f++) {
      out[f] += coords[s * m + f];
    }
  }
  return out;
}

/** 64-bit grouped sums and counts over rows [start, stop). */
export function groupedOracle(
  coords: Float64Array,
  labels: Uint32Array,
  k: number,
  m: number,
  start: number,
  stop: number,
): { sums: Float64Array; counts: Float64Array } {
  const sums = new Float64Array(k * m);
  const counts = new Float64Array(k);
  for (let s = start; s < stop; s++) {
    const c = labels[s];
    counts[c] += 1;
    for (let f = 0; f < m; f++) {
      sums[c * m + f] += coords[s * m + f];
    }
  }
  return { sums, counts };
}

function dist2(
  coords: Float64Array,
  m: number,
  i: number,
  j: number,
): number {
  let acc = 0;
  for (let f = 0; f < m; f++) {
    const d = coords[i * m + f] - coords[j * m + f];
    acc += d * d;
  }
  return acc;
}

export interface OraclePair {
  d2: number;
  i: number;
  j: number;
}

/** 64-bit best pair over a row set: d2 descending, lowest i, lowest j. */
export function pairOracle(
  coords: Float64Array,
  n: number,
  m: number,
  rows: ArrayLike<number>,
): OraclePair | null {
  let best: OraclePair | null = null;
  for (let r = 0; r < rows.length; r++) {
    const i = rows[r];
    for (let j = i + 1; j < n; j++) {
      const d2 = dist2(coords, m, i, j);
      if (
        best === null ||
        d2 > best.d2 ||
        (d2 === best.d2 && (i < best.i || (i === best.i && j < best.j)))
      ) {
        best = { d2, i, j };
      }
    }
  }
  return best;
}

/** Assert |actual - expected| <= rel * |expected|, with exactness at zero. */
export function expectRel(
  actual: number,
  expected: number,
  rel: number,
): void {
  if (expected === 0) {
    if (actual !== 0) {
      throw new Error(`expected exactly 0, got ${actual}`);
    }
    return;
  }
  const err = Math.abs(actual - expected) / Math.abs(expected);
  if (!(err <= rel)) {
    throw new Error(
      `relative error ${err} exceeds ${rel} (actual ${actual}, expected ${expected})`,
    );
  }
}
