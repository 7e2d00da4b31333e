/**
 * Wire protocol shared with the grafter core.
 *
 * POST /fill
 *   { "tokens": [...], "mask_positions": [...], "top_n": 10 }
 * → { "candidates": [[{ "token": "...", "score": 0.42 }, ...], ...] }
 *
 * Mask positions are whole-token indices into `tokens`; subword handling
 * stays on this side of the protocol.
 */

import { z } from "zod";

export const MaskRequestSchema = z.strictObject({
  tokens: z.array(z.string().min(1)).min(1),
  mask_positions: z.array(z.number().int().nonnegative()),
  top_n: z.number().int().min(1).default(10),
});

export type MaskRequest = z.infer<typeof MaskRequestSchema>;

export interface Candidate {
  token: string;
  score: number;
}

export interface MaskResponse {
  candidates: Candidate[][];
}

/** Semantic checks zod cannot express: in-range, strictly increasing. */
export function checkPositions(request: MaskRequest): string | null {
  let prev = -1;
  for (const pos of request.mask_positions) {
    if (pos >= request.tokens.length) {
      return `mask position ${pos} out of range for ${request.tokens.length} tokens`;
    }
    if (pos <= prev) {
      return "mask positions must be strictly increasing";
    }
    prev = pos;
  }
  return null;
}

/** Renormalize scores over the kept candidates, preserving order. */
export function renormalize(candidates: Candidate[]): Candidate[] {
  const total = candidates.reduce((acc, c) => acc + c.score, 0);
  if (total <= 0) {
    return candidates;
  }
  return candidates.map((c) => ({ token: c.token, score: c.score / total }));
}

/** Round scores for a stable wire format. */
export function roundScores(candidates: Candidate[], digits = 6): Candidate[] {
  const factor = 10 ** digits;
  return candidates.map((c) => ({
    token: c.token,
    score: Math.round(c.score * factor) / factor,
  }));
}
