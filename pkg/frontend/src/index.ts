export * from "./f32x2.js";
export * from "./kernels/wgsl.js";
export * from "./kernels/simulate.js";
export * from "./merge.js";
export * from "./engine.js";
export { GpuEngine, GpuUnavailableError, detectGPU } from "./gpu.js";
export * from "./jobs.js";
