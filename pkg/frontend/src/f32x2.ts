/**
 * Split-float arithmetic: each 64-bit host value rides in a (hi, lo) pair of
 * 32-bit floats, and every elementary operation rounds through f32. Devices
 * without native f64 run exactly these formulas in WGSL; the functions here
 * are the CPU model of that arithmetic, one fround per shader operation.
 *
 * The pair representation carries ~49 bits of mantissa, so a round-tripped
 * value sits within 2^-48 relative of the original and compensated sums stay
 * orders of magnitude inside the 1e-9 device tolerance.
 */

const fr = Math.fround;

/** A (hi, lo) pair; the represented value is hi + lo. */
export type F32x2 = [number, number];

export const DF_ZERO: F32x2 = [0, 0];

/** Split a 64-bit value into its f32 pair. */
export function split(x: number): F32x2 {
  const hi = fr(x);
  // x - hi is exact in f64: the operands agree in their top bits.
  const lo = fr(x - hi);
  return [hi, lo];
}

/** Recombine a pair; exact in f64 for normalized pairs. */
export function dfToNumber(v: F32x2): number {
  return v[0] + v[1];
}

/** Knuth two-sum in f32: returns [s, err] with s + err == a + b. */
export function twoSum(a: number, b: number): F32x2 {
  const s = fr(a + b);
  const bv = fr(s - a);
  const av = fr(s - bv);
  const br = fr(b - bv);
  const ar = fr(a - av);
  return [s, fr(ar + br)];
}

/** Two-sum shortcut valid when |a| >= |b| (or a == 0). */
export function fastTwoSum(a: number, b: number): F32x2 {
  const s = fr(a + b);
  return [s, fr(b - fr(s - a))];
}

/** Pair + pair addition (the usual high-low shader formula). */
export function dfAdd(x: F32x2, y: F32x2): F32x2 {
  const [sh, se] = twoSum(x[0], y[0]);
  const t = fr(se + fr(x[1] + y[1]));
  return fastTwoSum(sh, t);
}

export function dfSub(x: F32x2, y: F32x2): F32x2 {
  return dfAdd(x, [fr(-y[0]), fr(-y[1])]);
}

/** Veltkamp split of an f32 into two half-width parts (factor 2^12 + 1). */
function vsplit(a: number): F32x2 {
  // Overflows for |a| above ~8e34; coordinate data never gets there.
  const c = fr(a * 4097);
  const hi = fr(c - fr(c - a));
  return [hi, fr(a - hi)];
}

/** Exact f32 product as a pair: p + err == a * b. */
export function twoProd(a: number, b: number): F32x2 {
  const p = fr(a * b);
  const [ah, al] = vsplit(a);
  const [bh, bl] = vsplit(b);
  let err = fr(fr(fr(ah * bh) - p) + fr(ah * bl));
  err = fr(err + fr(al * bh));
  err = fr(err + fr(al * bl));
  return [p, err];
}

/** Square of a pair: (h + l)^2 with the cross terms compensated. */
export function dfSqr(v: F32x2): F32x2 {
  const [ph, pl] = twoProd(v[0], v[0]);
  const cross = fr(fr(2 * v[0] * v[1]) + fr(v[1] * v[1]));
  return fastTwoSum(ph, fr(pl + cross));
}

/**
 * Split an f64 buffer into the interleaved (hi, lo) layout the kernels bind:
 * element e occupies slots 2e and 2e + 1.
 */
export function splitBuffer(values: Float64Array): Float32Array {
  const out = new Float32Array(values.length * 2);
  for (let e = 0; e < values.length; e++) {
    const hi = fr(values[e]);
    out[2 * e] = hi;
    out[2 * e + 1] = fr(values[e] - hi);
  }
  return out;
}
