import { describe, expect, it } from "vitest";

import { findModel, listModels } from "../src/models.js";

describe("model roster", () => {
  it("lists exactly 22 models", () => {
    expect(listModels()).toHaveLength(22);
  });

  it("splits 3 word / 17 sbert / 2 classical", () => {
    const byFamily = { word: 0, sbert: 0, classical: 0 };
    for (const model of listModels()) {
      byFamily[model.family] += 1;
    }
    expect(byFamily).toEqual({ word: 3, sbert: 17, classical: 2 });
  });

  it("tags known models with their family", () => {
    expect(findModel("bert-large-cased").family).toBe("word");
    expect(findModel("average_word_embeddings_glove.6B.300d").family).toBe("classical");
    expect(findModel("paraphrase-distilroberta-base-v2").family).toBe("sbert");
  });

  it("has unique ids and positive dimensions", () => {
    const ids = listModels().map((m) => m.id);
    expect(new Set(ids).size).toBe(ids.length);
    for (const model of listModels()) {
      expect(model.dim).toBeGreaterThan(0);
    }
  });

  it("rejects unknown ids", () => {
    expect(() => findModel("gpt-17")).toThrow(/unknown model id/);
  });
});
