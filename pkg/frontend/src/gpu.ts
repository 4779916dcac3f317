/**
 * WebGPU engine: compiles the WGSL kernels once per job kind, binds the
 * split coordinate pairs as storage buffers, and reads workgroup partials
 * back for the shared host merges. Construction fails with
 * GpuUnavailableError when the runtime has no `navigator.gpu` or no adapter;
 * callers fall back to the simulator.
 *
 * Buffers are created per dispatch and destroyed after readback. That is
 * deliberately naive: the job layer's block decomposition bounds every
 * buffer, and kernel tuning is out of scope.
 */

import { ClusterBlock, Engine, EngineInfo } from "./engine.js";
import { BestPair, mergeClusterSum, mergeMaxPair, mergeSum } from "./merge.js";
import { clusterSumShader, maxPairShader, sumShader } from "./kernels/wgsl.js";
import { workgroupCount } from "./kernels/simulate.js";
import {
  GPU,
  GPUBindGroup,
  GPUBuffer,
  GPUBufferUsage,
  GPUComputePipeline,
  GPUDevice,
  GPUMapMode,
} from "./gpu-types.js";

export class GpuUnavailableError extends Error {}

/** The WebGPU entry point of this runtime, if it has one. */
export function detectGPU(): GPU | null {
  const nav = (globalThis as { navigator?: { gpu?: GPU } }).navigator;
  return nav?.gpu ?? null;
}

const SHADERS = {
  "max-pair-distance": maxPairShader,
  "coordinate-sum": sumShader,
  "cluster-sum": clusterSumShader,
} as const;

type Kind = keyof typeof SHADERS;

export class GpuEngine implements Engine {
  private readonly pipelines = new Map<Kind, GPUComputePipeline>();

  private constructor(
    private readonly device: GPUDevice,
    readonly workgroupSize: number,
    private readonly adapterName: string,
  ) {}

  static async create(workgroupSize = 256): Promise<GpuEngine> {
    const gpu = detectGPU();
    if (!gpu) {
      throw new GpuUnavailableError("this runtime has no WebGPU implementation");
    }
    const adapter = await gpu.requestAdapter();
    if (!adapter) {
      throw new GpuUnavailableError("no WebGPU adapter is present");
    }
    const device = await adapter.requestDevice();
    let wg = workgroupSize;
    while (wg > device.limits.maxComputeWorkgroupSizeX) {
      wg >>= 1;
    }
    const name = adapter.info?.description || adapter.info?.vendor || "webgpu";
    return new GpuEngine(device, wg, name);
  }

  info(): EngineInfo {
    return {
      engine: "gpu",
      workgroupSize: this.workgroupSize,
      maxBufferBytes: this.device.limits.maxStorageBufferBindingSize,
      adapter: this.adapterName,
    };
  }

  private pipeline(kind: Kind): GPUComputePipeline {
    let p = this.pipelines.get(kind);
    if (!p) {
      const module = this.device.createShaderModule({
        code: SHADERS[kind](this.workgroupSize),
      });
      p = this.device.createComputePipeline({
        layout: "auto",
        compute: { module, entryPoint: "main" },
      });
      this.pipelines.set(kind, p);
    }
    return p;
  }

  private upload(data: ArrayBufferView, usage: number): GPUBuffer {
    const buffer = this.device.createBuffer({ size: data.byteLength, usage });
    this.device.queue.writeBuffer(buffer, 0, data);
    return buffer;
  }

  private storage(data: ArrayBufferView): GPUBuffer {
    return this.upload(data, GPUBufferUsage.STORAGE | GPUBufferUsage.COPY_DST);
  }

  private uniform(words: number[]): GPUBuffer {
    return this.upload(
      new Uint32Array(words),
      GPUBufferUsage.UNIFORM | GPUBufferUsage.COPY_DST,
    );
  }

  /** Dispatch one pass and read the listed output buffers back. */
  private async run(
    kind: Kind,
    buffers: GPUBuffer[],
    groups: number,
    outputs: GPUBuffer[],
  ): Promise<ArrayBuffer[]> {
    const pipeline = this.pipeline(kind);
    const bindGroup: GPUBindGroup = this.device.createBindGroup({
      layout: pipeline.getBindGroupLayout(0),
      entries: buffers.map((buffer, binding) => ({ binding, resource: { buffer } })),
    });
    const readbacks = outputs.map((out) =>
      this.device.createBuffer({
        size: out.size,
        usage: GPUBufferUsage.MAP_READ | GPUBufferUsage.COPY_DST,
      }),
    );

    const encoder = this.device.createCommandEncoder();
    const pass = encoder.beginComputePass();
    pass.setPipeline(pipeline);
    pass.setBindGroup(0, bindGroup);
    pass.dispatchWorkgroups(groups);
    pass.end();
    outputs.forEach((out, idx) =>
      encoder.copyBufferToBuffer(out, 0, readbacks[idx], 0, out.size),
    );
    this.device.queue.submit([encoder.finish()]);

    const results: ArrayBuffer[] = [];
    for (const readback of readbacks) {
      await readback.mapAsync(GPUMapMode.READ);
      results.push(readback.getMappedRange().slice(0));
      readback.unmap();
    }
    [...buffers, ...readbacks].forEach((b) => b.destroy());
    return results;
  }

  private output(bytes: number): GPUBuffer {
    return this.device.createBuffer({
      size: bytes,
      usage: GPUBufferUsage.STORAGE | GPUBufferUsage.COPY_SRC,
    });
  }

  async maxPair(
    coords: Float32Array,
    n: number,
    m: number,
    rows: Uint32Array,
  ): Promise<BestPair | null> {
    if (rows.length === 0) {
      return null;
    }
    const groups = workgroupCount(rows.length, this.workgroupSize);
    const partials = this.output(groups * 16);
    const [buffer] = await this.run(
      "max-pair-distance",
      [this.storage(coords), this.storage(rows), this.uniform([n, m, rows.length]), partials],
      groups,
      [partials],
    );
    return mergeMaxPair({ groups, buffer });
  }

  async sumBlock(
    coords: Float32Array,
    m: number,
    start: number,
    count: number,
  ): Promise<Float64Array> {
    const groups = workgroupCount(count, this.workgroupSize);
    const partials = this.output(groups * m * 8);
    const [buffer] = await this.run(
      "coordinate-sum",
      [this.storage(coords), this.uniform([start, count, m]), partials],
      groups,
      [partials],
    );
    return mergeSum(new Float32Array(buffer), groups, m);
  }

  async clusterSumBlock(
    coords: Float32Array,
    labels: Uint32Array,
    m: number,
    k: number,
    start: number,
    count: number,
  ): Promise<ClusterBlock> {
    const groups = workgroupCount(count, this.workgroupSize);
    const sums = this.output(groups * k * m * 8);
    const counts = this.output(groups * k * 4);
    const flag = this.upload(
      new Uint32Array([0]),
      GPUBufferUsage.STORAGE | GPUBufferUsage.COPY_DST | GPUBufferUsage.COPY_SRC,
    );
    const [sumsBuf, countsBuf, flagBuf] = await this.run(
      "cluster-sum",
      [this.storage(coords), this.storage(labels), this.uniform([start, count, m, k]), sums, counts, flag],
      groups,
      [sums, counts, flag],
    );
    const merged = mergeClusterSum(
      new Float32Array(sumsBuf), new Uint32Array(countsBuf), groups, k, m,
    );
    return { ...merged, badLabel: new Uint32Array(flagBuf)[0] !== 0 };
  }

  close(): Promise<void> {
    this.device.destroy();
    return Promise.resolve();
  }
}
