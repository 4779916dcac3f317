/**
 * Wire-level jobs. A job names its coordinate buffer by content id so a
 * caller ships the payload once per buffer and addresses it by id afterward;
 * sum jobs carry a block-aligned [start, stop) range and come back as
 * per-block results, which keeps splitting a job at a block boundary
 * equivalent to running it whole.
 */

import { Buffer } from "node:buffer";

import { Engine } from "./engine.js";
import { BestPair } from "./merge.js";
import { splitBuffer } from "./f32x2.js";

export const MAX_PAIR = "max-pair-distance";
export const COORD_SUM = "coordinate-sum";
export const CLUSTER_SUM = "cluster-sum";

export type JobKind = typeof MAX_PAIR | typeof COORD_SUM | typeof CLUSTER_SUM;

export interface WireJob {
  kind: JobKind;
  n: number;
  m: number;
  /** Content id of the coordinate buffer (any stable string works). */
  coordsId: string;
  /** Base64 of the n*m little-endian f64 row-major payload, first time only. */
  coordsB64?: string;
  /** max-pair only: base64 of little-endian u32 row indices. */
  rowsB64?: string;
  /** cluster-sum only: base64 of n little-endian u32 labels. */
  labelsB64?: string;
  start?: number;
  stop?: number;
  block?: number;
  k?: number;
}

export type WireResult =
  | { kind: typeof MAX_PAIR; pair: BestPair | null }
  | { kind: typeof COORD_SUM; firstBlock: number; sums: number[][] }
  | {
      kind: typeof CLUSTER_SUM;
      firstBlock: number;
      sums: number[][][];
      counts: number[][];
    };

export type JobErrorType = "validation" | "contract" | "unknown-coords";

/** Job rejection the protocol reports without tearing the runner down. */
export class JobError extends Error {
  constructor(
    readonly type: JobErrorType,
    message: string,
  ) {
    super(message);
  }
}

function decodeBytes(b64: string): ArrayBuffer {
  const raw = Buffer.from(b64, "base64");
  // Copy out of the shared pool so typed views start aligned at offset 0.
  const bytes = new ArrayBuffer(raw.length);
  new Uint8Array(bytes).set(raw);
  return bytes;
}

export function decodeF64(b64: string): Float64Array {
  return new Float64Array(decodeBytes(b64));
}

export function decodeU32(b64: string): Uint32Array {
  return new Uint32Array(decodeBytes(b64));
}

interface StoredCoords {
  hl: Float32Array;
  n: number;
  m: number;
}

/** Split coordinate buffers held per content id. */
export class CoordsStore {
  private readonly buffers = new Map<string, StoredCoords>();

  resolve(job: WireJob): StoredCoords {
    const { coordsId, n, m } = job;
    if (job.coordsB64 !== undefined) {
      const values = decodeF64(job.coordsB64);
      if (values.length !== n * m) {
        throw new JobError(
          "contract",
          `coords payload holds ${values.length} values, expected ${n}x${m}`,
        );
      }
      this.buffers.set(coordsId, { hl: splitBuffer(values), n, m });
    }
    const stored = this.buffers.get(coordsId);
    if (!stored) {
      throw new JobError(
        "unknown-coords",
        `no coordinate buffer with id ${coordsId}; resend with the payload`,
      );
    }
    if (stored.n !== n || stored.m !== m) {
      throw new JobError(
        "contract",
        `buffer ${coordsId} is ${stored.n}x${stored.m}, job says ${n}x${m}`,
      );
    }
    return stored;
  }

  get size(): number {
    return this.buffers.size;
  }
}

function requireInt(value: unknown, name: string): number {
  if (typeof value !== "number" || !Number.isInteger(value) || value < 0) {
    throw new JobError("contract", `${name} must be a non-negative integer`);
  }
  return value;
}

function checkRange(job: WireJob): { start: number; stop: number; block: number } {
  const start = requireInt(job.start ?? 0, "start");
  const stop = requireInt(job.stop ?? 0, "stop");
  const block = requireInt(job.block ?? 0, "block");
  if (block < 1) {
    throw new JobError("contract", `block size must be >= 1, got ${block}`);
  }
  if (start > stop || stop > job.n) {
    throw new JobError(
      "contract",
      `job range [${start}, ${stop}) must lie within [0, ${job.n}]`,
    );
  }
  if (start % block !== 0) {
    throw new JobError(
      "contract",
      `job range must start on a block boundary (start=${start}, block=${block})`,
    );
  }
  return { start, stop, block };
}

function* blockBounds(
  start: number,
  stop: number,
  block: number,
): Generator<[number, number]> {
  for (let s = start; s < stop; s += block) {
    yield [s, Math.min(s + block, stop)];
  }
}

/** Decode, validate, and run one wire job on the given engine. */
export async function executeJob(
  engine: Engine,
  job: WireJob,
  store: CoordsStore,
): Promise<WireResult> {
  requireInt(job.n, "n");
  if (!Number.isInteger(job.m) || job.m < 1) {
    throw new JobError("contract", `m must be a positive integer, got ${job.m}`);
  }
  const coords = store.resolve(job);

  if (job.kind === MAX_PAIR) {
    if (job.rowsB64 === undefined) {
      throw new JobError("contract", "max-pair-distance job carries no rows");
    }
    const rows = decodeU32(job.rowsB64);
    for (const row of rows) {
      if (row >= job.n) {
        throw new JobError("contract", `scan rows must lie in [0, ${job.n})`);
      }
    }
    const pair = await engine.maxPair(coords.hl, job.n, job.m, rows);
    return { kind: MAX_PAIR, pair };
  }

  if (job.kind === COORD_SUM) {
    const { start, stop, block } = checkRange(job);
    const sums: number[][] = [];
    for (const [s, e] of blockBounds(start, stop, block)) {
      sums.push(Array.from(await engine.sumBlock(coords.hl, job.m, s, e - s)));
    }
    return { kind: COORD_SUM, firstBlock: Math.floor(start / block), sums };
  }

  if (job.kind === CLUSTER_SUM) {
    const { start, stop, block } = checkRange(job);
    const k = requireInt(job.k ?? 0, "k");
    if (k < 1) {
      throw new JobError("contract", `k must be >= 1, got ${k}`);
    }
    if (job.labelsB64 === undefined) {
      throw new JobError("contract", "cluster-sum job carries no labels");
    }
    const labels = decodeU32(job.labelsB64);
    if (labels.length !== job.n) {
      throw new JobError(
        "contract",
        `labels hold ${labels.length} entries, expected ${job.n}`,
      );
    }
    const sums: number[][][] = [];
    const counts: number[][] = [];
    for (const [s, e] of blockBounds(start, stop, block)) {
      const result = await engine.clusterSumBlock(
        coords.hl, labels, job.m, k, s, e - s,
      );
      if (result.badLabel) {
        throw new JobError("validation", `label out of range [0, ${k})`);
      }
      const perCluster: number[][] = [];
      for (let c = 0; c < k; c++) {
        perCluster.push(Array.from(result.sums.subarray(c * job.m, (c + 1) * job.m)));
      }
      sums.push(perCluster);
      counts.push(Array.from(result.counts));
    }
    return {
      kind: CLUSTER_SUM,
      firstBlock: Math.floor(start / block),
      sums,
      counts,
    };
  }

  throw new JobError("contract", `unknown job kind ${(job as WireJob).kind}`);
}
