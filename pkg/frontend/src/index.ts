/**
 * Entry point. Configuration via flags or environment:
 *
 *   --model  <id>   Hugging Face model id, or "stub" (GRAFTER_SIDECAR_MODEL)
 *   --host   <addr> listen address                   (GRAFTER_SIDECAR_HOST)
 *   --port   <n>    listen port                      (GRAFTER_SIDECAR_PORT)
 *   --top-n-cap <n> upper bound on candidates per mask
 *   --device <dev>  device selector passed to the pipeline, e.g. cpu
 */

import { FillMaskBackend, StubBackend, TransformersBackend } from "./backends.js";
import { DEFAULT_CONFIG, startServer } from "./server.js";

interface Options {
  model: string;
  host: string;
  port: number;
  topNCap: number;
  device?: string;
}

function parseArgs(argv: string[]): Options {
  const options: Options = {
    model: process.env.GRAFTER_SIDECAR_MODEL ?? "stub",
    host: process.env.GRAFTER_SIDECAR_HOST ?? DEFAULT_CONFIG.host,
    port: Number(process.env.GRAFTER_SIDECAR_PORT ?? DEFAULT_CONFIG.port),
    topNCap: DEFAULT_CONFIG.topNCap,
    device: undefined,
  };
  for (let i = 0; i < argv.length; i += 1) {
    const flag = argv[i];
    const value = argv[i + 1];
    switch (flag) {
      case "--model":
        options.model = value;
        i += 1;
        break;
      case "--host":
        options.host = value;
        i += 1;
        break;
      case "--port":
        options.port = Number(value);
        i += 1;
        break;
      case "--top-n-cap":
        options.topNCap = Number(value);
        i += 1;
        break;
      case "--device":
        options.device = value;
        i += 1;
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (!Number.isInteger(options.port) || options.port < 0) {
    throw new Error(`bad port ${options.port}`);
  }
  if (!Number.isInteger(options.topNCap) || options.topNCap < 1) {
    throw new Error(`top-n cap must be >= 1`);
  }
  return options;
}

async function main(): Promise<void> {
  const options = parseArgs(process.argv.slice(2));
  let backend: FillMaskBackend;
  if (options.model === "stub") {
    backend = new StubBackend();
  } else {
    console.error(`loading fill-mask pipeline for ${options.model} ...`);
    backend = await TransformersBackend.load(options.model, options.device);
  }
  const server = await startServer(backend, {
    host: options.host,
    port: options.port,
    topNCap: options.topNCap,
  });
  const address = server.address();
  const where =
    typeof address === "object" && address !== null
      ? `${address.address}:${address.port}`
      : String(address);
  console.error(`grafter-fillmask serving ${backend.modelId} on ${where}`);
}

main().catch((err) => {
  console.error(String(err));
  process.exit(1);
});
