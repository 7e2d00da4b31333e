/**
 * The HTTP service: POST /fill per the protocol, GET /health with the
 * model identifier. Malformed requests get 400, backend failures 500;
 * neither stops the server.
 */

import { createServer, IncomingMessage, Server, ServerResponse } from "node:http";

import { FillMaskBackend } from "./backends.js";
import {
  MaskRequestSchema,
  MaskResponse,
  checkPositions,
  roundScores,
} from "./protocol.js";

export interface SidecarConfig {
  host: string;
  port: number;
  topNCap: number;
}

export const DEFAULT_CONFIG: SidecarConfig = {
  host: "127.0.0.1",
  port: 8500,
  topNCap: 50,
};

function sendJson(res: ServerResponse, status: number, body: unknown): void {
  const payload = JSON.stringify(body);
  res.writeHead(status, { "Content-Type": "application/json" });
  res.end(payload);
}

async function readBody(req: IncomingMessage): Promise<string> {
  const chunks: Buffer[] = [];
  for await (const chunk of req) {
    chunks.push(chunk as Buffer);
  }
  return Buffer.concat(chunks).toString("utf-8");
}

export function buildServer(
  backend: FillMaskBackend,
  config: Partial<SidecarConfig> = {},
): Server {
  const topNCap = config.topNCap ?? DEFAULT_CONFIG.topNCap;

  return createServer(async (req, res) => {
    try {
      if (req.method === "GET" && req.url === "/health") {
        sendJson(res, 200, { status: "ok", model: backend.modelId });
        return;
      }
      if (req.method !== "POST" || req.url !== "/fill") {
        sendJson(res, 404, { error: "not found" });
        return;
      }
      let parsed: unknown;
      try {
        parsed = JSON.parse(await readBody(req));
      } catch {
        sendJson(res, 400, { error: "body is not valid JSON" });
        return;
      }
      const result = MaskRequestSchema.safeParse(parsed);
      if (!result.success) {
        sendJson(res, 400, { error: result.error.issues[0]?.message ?? "bad request" });
        return;
      }
      const request = result.data;
      const positionError = checkPositions(request);
      if (positionError !== null) {
        sendJson(res, 400, { error: positionError });
        return;
      }
      const topN = Math.min(request.top_n, topNCap);
      const lists = await backend.predict(
        request.tokens,
        request.mask_positions,
        topN,
      );
      const response: MaskResponse = {
        candidates: lists.map((list) => roundScores(list.slice(0, topN))),
      };
      sendJson(res, 200, response);
    } catch (err) {
      sendJson(res, 500, { error: String(err) });
    }
  });
}

export function startServer(
  backend: FillMaskBackend,
  config: Partial<SidecarConfig> = {},
): Promise<Server> {
  const host = config.host ?? DEFAULT_CONFIG.host;
  const port = config.port ?? DEFAULT_CONFIG.port;
  const server = buildServer(backend, config);
  return new Promise((resolve, reject) => {
    server.once("error", reject);
    server.listen(port, host, () => resolve(server));
  });
}
