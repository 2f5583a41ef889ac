/**
 * Real model inference through transformers.js (ONNX ports of the
 * pretrained checkpoints). Word-family models yield last-hidden-layer
 * piece states pooled back onto whitespace/punctuation words; sentence
 * models yield their native pooled output. Model revisions come from
 * revisions.json next to this package so re-runs fetch the same weights.
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { ModelInfo } from "./models.js";
import { EmbeddingBackend, TokenEmbedding } from "./backend.js";
import { poolPiecesToWords, wordTokenize } from "./tokenize.js";

type RevisionLock = Record<string, string>;

function loadRevisions(): RevisionLock {
  const here = dirname(fileURLToPath(import.meta.url));
  for (const candidate of [join(here, "..", "revisions.json"), join(here, "..", "..", "revisions.json")]) {
    try {
      return JSON.parse(readFileSync(candidate, "utf-8"));
    } catch {
      // next candidate
    }
  }
  return {};
}

export class TransformersBackend implements EmbeddingBackend {
  readonly name = "transformers";
  private revisions = loadRevisions();
  private pipelines = new Map<string, Promise<any>>();

  private hubId(model: ModelInfo): string {
    // transformers.js hosts ONNX ports under the Xenova namespace; sbert
    // and classical ids live under sentence-transformers upstream
    return `Xenova/${model.id}`;
  }

  private extractor(model: ModelInfo): Promise<any> {
    let pending = this.pipelines.get(model.id);
    if (!pending) {
      pending = (async () => {
        let transformers;
        try {
          transformers = await import("@xenova/transformers");
        } catch {
          throw new Error(
            "the transformers backend needs the optional @xenova/transformers dependency " +
              "(npm install @xenova/transformers); for offline work use --backend hash",
          );
        }
        return transformers.pipeline("feature-extraction", this.hubId(model), {
          revision: this.revisions[model.id] ?? "main",
        });
      })();
      this.pipelines.set(model.id, pending);
    }
    return pending;
  }

  async embedTokens(model: ModelInfo, text: string): Promise<TokenEmbedding[]> {
    if (model.family !== "word") {
      throw new Error(
        `model ${model.id} is a sentence encoder; token vectors are only defined for word-family models`,
      );
    }
    const extractor = await this.extractor(model);
    const words = wordTokenize(text);
    if (words.length === 0) {
      return [];
    }
    // per-word piece counts let us pool the full-sequence hidden states
    // (specials stripped) back onto the original words
    const pieceCounts: number[] = [];
    for (const word of words) {
      const ids = extractor.tokenizer.encode(word, { add_special_tokens: false });
      pieceCounts.push(Math.max(1, ids.length));
    }
    const output = await extractor(text, { pooling: "none", add_special_tokens: false });
    const [, seqLen, dim] = output.dims;
    const flat: number[][] = [];
    for (let i = 0; i < seqLen; i++) {
      flat.push(Array.from(output.data.slice(i * dim, (i + 1) * dim), Number));
    }
    const expected = pieceCounts.reduce((a, b) => a + b, 0);
    if (expected !== flat.length) {
      throw new Error(
        `tokenizer alignment failed for ${model.id}: ${expected} word pieces vs ${flat.length} states`,
      );
    }
    const pooled = poolPiecesToWords(flat, pieceCounts);
    return words.map((surface, i) => ({ surface, vector: pooled[i] }));
  }

  async embedSentence(model: ModelInfo, text: string): Promise<number[]> {
    const extractor = await this.extractor(model);
    const output = await extractor(text, { pooling: "mean", normalize: false });
    return Array.from(output.data, Number);
  }
}
