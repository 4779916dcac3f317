/**
 * The slice of the WebGPU API the GPU engine touches, declared locally so
 * the package typechecks under a plain Node lib. At runtime these are only
 * ever produced by a real `navigator.gpu`, so the shapes follow the spec;
 * nothing here is implemented in this package.
 */

export interface GPU {
  requestAdapter(): Promise<GPUAdapter | null>;
}

export interface GPUAdapter {
  info?: { description?: string; vendor?: string };
  requestDevice(): Promise<GPUDevice>;
}

export interface GPUDevice {
  limits: {
    maxStorageBufferBindingSize: number;
    maxComputeWorkgroupSizeX: number;
  };
  queue: GPUQueue;
  createShaderModule(desc: { code: string }): GPUShaderModule;
  createComputePipeline(desc: {
    layout: "auto";
    compute: { module: GPUShaderModule; entryPoint: string };
  }): GPUComputePipeline;
  createBuffer(desc: {
    size: number;
    usage: number;
    mappedAtCreation?: boolean;
  }): GPUBuffer;
  createBindGroup(desc: {
    layout: GPUBindGroupLayout;
    entries: { binding: number; resource: { buffer: GPUBuffer } }[];
  }): GPUBindGroup;
  createCommandEncoder(): GPUCommandEncoder;
  destroy(): void;
}

export interface GPUQueue {
  writeBuffer(
    buffer: GPUBuffer,
    offset: number,
    data: ArrayBufferView | ArrayBuffer,
  ): void;
  submit(buffers: GPUCommandBuffer[]): void;
}

export interface GPUBuffer {
  size: number;
  mapAsync(mode: number): Promise<void>;
  getMappedRange(): ArrayBuffer;
  unmap(): void;
  destroy(): void;
}

export interface GPUShaderModule {
  readonly label?: string;
}

export interface GPUComputePipeline {
  getBindGroupLayout(index: number): GPUBindGroupLayout;
}

export interface GPUBindGroupLayout {
  readonly label?: string;
}

export interface GPUBindGroup {
  readonly label?: string;
}

export interface GPUCommandEncoder {
  beginComputePass(): GPUComputePassEncoder;
  copyBufferToBuffer(
    src: GPUBuffer,
    srcOffset: number,
    dst: GPUBuffer,
    dstOffset: number,
    size: number,
  ): void;
  finish(): GPUCommandBuffer;
}

export interface GPUComputePassEncoder {
  setPipeline(pipeline: GPUComputePipeline): void;
  setBindGroup(index: number, group: GPUBindGroup): void;
  dispatchWorkgroups(x: number): void;
  end(): void;
}

export interface GPUCommandBuffer {
  readonly label?: string;
}

export const GPUBufferUsage = {
  MAP_READ: 0x0001,
  COPY_SRC: 0x0004,
  COPY_DST: 0x0008,
  UNIFORM: 0x0040,
  STORAGE: 0x0080,
} as const;

export const GPUMapMode = {
  READ: 0x0001,
} as const;
