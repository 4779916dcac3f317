/**
 * Execution engines behind the job layer: the CPU simulator here, the WebGPU
 * engine in gpu.ts. Both take coordinates already split into (hi, lo) pairs
 * and both hand their workgroup partials to the same host merges, so a block
 * result has one shape and one rounding story regardless of engine.
 */

import { BestPair, mergeClusterSum, mergeMaxPair, mergeSum } from "./merge.js";
import {
  simulateClusterSum,
  simulateMaxPair,
  simulateSum,
} from "./kernels/simulate.js";

export interface EngineInfo {
  engine: "sim" | "gpu";
  workgroupSize: number;
  /** Largest single buffer a job may bind, in bytes. */
  maxBufferBytes: number;
  adapter?: string;
}

export interface ClusterBlock {
  sums: Float64Array;
  counts: Float64Array;
  badLabel: boolean;
}

export interface Engine {
  info(): EngineInfo;
  /** Best pair over a row set, scanning each row i against all j > i. */
  maxPair(
    coords: Float32Array,
    n: number,
    m: number,
    rows: Uint32Array,
  ): Promise<BestPair | null>;
  /** Per-feature sums over rows [start, start + count). */
  sumBlock(
    coords: Float32Array,
    m: number,
    start: number,
    count: number,
  ): Promise<Float64Array>;
  /** Per-cluster sums and counts over rows [start, start + count). */
  clusterSumBlock(
    coords: Float32Array,
    labels: Uint32Array,
    m: number,
    k: number,
    start: number,
    count: number,
  ): Promise<ClusterBlock>;
  close(): Promise<void>;
}

/** Engine that runs the kernel model in-process. */
export class SimEngine implements Engine {
  constructor(readonly workgroupSize = 256) {}

  info(): EngineInfo {
    // Host memory is the only limit; 4 GiB keeps job planning conservative.
    return {
      engine: "sim",
      workgroupSize: this.workgroupSize,
      maxBufferBytes: 4 * 1024 * 1024 * 1024,
    };
  }

  maxPair(
    coords: Float32Array,
    n: number,
    m: number,
    rows: Uint32Array,
  ): Promise<BestPair | null> {
    const partials = simulateMaxPair(coords, n, m, rows, this.workgroupSize);
    return Promise.resolve(mergeMaxPair(partials));
  }

  sumBlock(
    coords: Float32Array,
    m: number,
    start: number,
    count: number,
  ): Promise<Float64Array> {
    const { groups, pairs } = simulateSum(coords, m, start, count, this.workgroupSize);
    return Promise.resolve(mergeSum(pairs, groups, m));
  }

  clusterSumBlock(
    coords: Float32Array,
    labels: Uint32Array,
    m: number,
    k: number,
    start: number,
    count: number,
  ): Promise<ClusterBlock> {
    const partials = simulateClusterSum(
      coords, labels, m, k, start, count, this.workgroupSize,
    );
    const merged = mergeClusterSum(
      partials.sums, partials.counts, partials.groups, k, m,
    );
    return Promise.resolve({ ...merged, badLabel: partials.badLabel });
  }

  close(): Promise<void> {
    return Promise.resolve();
  }
}
