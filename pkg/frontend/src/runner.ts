/**
 * Stdio device runner: one JSON request per stdin line, one JSON response
 * per stdout line, requests handled strictly in order.
 *
 *   {"id": 1, "op": "info"}
 *   {"id": 2, "op": "execute", "job": {...}}      (see jobs.ts for the schema)
 *   {"id": 3, "op": "shutdown"}
 *
 * Responses are {"id", "ok": true, "info" | "result": ...} or {"id", "ok":
 * false, "error": {"type", "message"}}. Job rejections come back as errors
 * without ending the process; losing stdin ends it.
 */

import process from "node:process";
import { createInterface } from "node:readline";

import { Engine, SimEngine } from "./engine.js";
import { GpuEngine, GpuUnavailableError } from "./gpu.js";
import { CoordsStore, executeJob, JobError, WireJob } from "./jobs.js";

type EngineChoice = "sim" | "gpu" | "auto";

interface RunnerArgs {
  engine: EngineChoice;
  workgroupSize: number;
}

interface Request {
  id?: number;
  op?: string;
  job?: WireJob;
}

function usageError(message: string): never {
  process.stderr.write(`${message}\n`);
  process.stderr.write(
    "usage: runner [--engine sim|gpu|auto] [--workgroup-size N]\n",
  );
  process.exit(2);
}

function parseArgs(argv: string[]): RunnerArgs {
  const args: RunnerArgs = { engine: "auto", workgroupSize: 256 };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (flag === "--engine") {
      if (value !== "sim" && value !== "gpu" && value !== "auto") {
        usageError(`unknown engine ${value}`);
      }
      args.engine = value;
      i++;
    } else if (flag === "--workgroup-size") {
      const size = Number(value);
      if (!Number.isInteger(size) || size < 1 || size > 1024 || (size & (size - 1)) !== 0) {
        usageError(`workgroup size must be a power of two in [1, 1024], got ${value}`);
      }
      args.workgroupSize = size;
      i++;
    } else {
      usageError(`unknown argument ${flag}`);
    }
  }
  return args;
}

async function makeEngine(args: RunnerArgs): Promise<Engine> {
  if (args.engine === "sim") {
    return new SimEngine(args.workgroupSize);
  }
  try {
    return await GpuEngine.create(args.workgroupSize);
  } catch (err) {
    if (args.engine === "gpu" || !(err instanceof GpuUnavailableError)) {
      process.stderr.write(`no usable GPU: ${(err as Error).message}\n`);
      process.exit(3);
    }
    return new SimEngine(args.workgroupSize);
  }
}

async function main(): Promise<void> {
  const engine = await makeEngine(parseArgs(process.argv.slice(2)));
  const store = new CoordsStore();
  const reply = (response: object): void => {
    process.stdout.write(`${JSON.stringify(response)}\n`);
  };

  const lines = createInterface({ input: process.stdin, terminal: false });
  for await (const line of lines) {
    if (!line.trim()) {
      continue;
    }
    let request: Request;
    try {
      request = JSON.parse(line) as Request;
    } catch {
      reply({ id: 0, ok: false, error: { type: "contract", message: "request is not JSON" } });
      continue;
    }
    const id = request.id ?? 0;

    if (request.op === "info") {
      reply({ id, ok: true, info: engine.info() });
    } else if (request.op === "shutdown") {
      reply({ id, ok: true });
      break;
    } else if (request.op === "execute" && request.job !== undefined) {
      try {
        reply({ id, ok: true, result: await executeJob(engine, request.job, store) });
      } catch (err) {
        const type = err instanceof JobError ? err.type : "internal";
        reply({ id, ok: false, error: { type, message: (err as Error).message } });
      }
    } else {
      reply({
        id,
        ok: false,
        error: { type: "contract", message: `unknown op ${request.op}` },
      });
    }
  }
  lines.close();
  process.stdin.destroy(); // otherwise the open pipe outlives a shutdown
  await engine.close();
}

main().catch((err: Error) => {
  process.stderr.write(`${err.stack ?? err.message}\n`);
  process.exit(1);
});
