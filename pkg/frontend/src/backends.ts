/**
 * Model backends behind the /fill endpoint.
 *
 * The stub backend is deterministic and dependency-free; it exists for
 * tests, golden recordings and offline smoke runs. The transformers
 * backend wraps a Hugging Face fill-mask pipeline (e.g. SciBERT) and is
 * loaded lazily so the package works without the model stack installed.
 */

import { Candidate, renormalize } from "./protocol.js";

export interface FillMaskBackend {
  readonly modelId: string;
  predict(
    tokens: string[],
    positions: number[],
    topN: number,
  ): Promise<Candidate[][]>;
}

/** Fixed vocabulary with harmonic weights; same list for every position. */
const STUB_VOCAB = [
  "the", "of", "and", "to", "a", "patient", "exam", "stable", "daily",
  "dose", "mri", "left", "chest", "acute", "mild", "chronic",
];

export class StubBackend implements FillMaskBackend {
  readonly modelId = "stub";

  async predict(
    tokens: string[],
    positions: number[],
    topN: number,
  ): Promise<Candidate[][]> {
    const ranked = STUB_VOCAB.slice(0, topN).map((token, i) => ({
      token,
      score: 1 / (i + 1),
    }));
    const perPosition = renormalize(ranked);
    return positions.map(() => perPosition.map((c) => ({ ...c })));
  }
}

interface FillMaskPrediction {
  token_str: string;
  score: number;
}

export class TransformersBackend implements FillMaskBackend {
  private pipe: any;

  private constructor(
    readonly modelId: string,
    pipe: any,
  ) {
    this.pipe = pipe;
  }

  static async load(modelId: string, device?: string): Promise<TransformersBackend> {
    // resolved at runtime only: the package is optional and its install
    // needs network access for onnxruntime binaries
    const moduleId = "@huggingface/transformers";
    let transformers: any;
    try {
      transformers = await import(moduleId);
    } catch {
      throw new Error(
        "@huggingface/transformers is not installed; use --model stub or " +
          "install the optional dependency",
      );
    }
    const options = device ? { device } : {};
    const pipe = await transformers.pipeline("fill-mask", modelId, options);
    return new TransformersBackend(modelId, pipe);
  }

  async predict(
    tokens: string[],
    positions: number[],
    topN: number,
  ): Promise<Candidate[][]> {
    const maskToken: string = this.pipe.tokenizer.mask_token;
    const masked = tokens.slice();
    for (const pos of positions) {
      masked[pos] = maskToken;
    }
    const output = await this.pipe(masked.join(" "), { top_k: topN });
    // one mask → flat list; several masks → list per mask, in order
    const perMask: FillMaskPrediction[][] =
      positions.length === 1 ? [output] : output;
    return perMask.map((predictions) => {
      const kept = predictions
        .map((p) => ({ token: p.token_str.trim(), score: p.score }))
        .filter((c) => c.token.length > 0 && !/\s/.test(c.token));
      return renormalize(kept);
    });
  }
}
