/**
 * The supported model roster: 3 word-based transformers, 17 sentence-bert
 * models and 2 classical averaged word embeddings. Dimensions are the
 * models' native output widths; the deterministic backend reuses them so
 * emitted corpora have realistic shapes.
 */

export type ModelFamily = "word" | "sbert" | "classical";

export interface ModelInfo {
  id: string;
  family: ModelFamily;
  dim: number;
}

export const MODEL_ROSTER: readonly ModelInfo[] = [
  { id: "bert-base-cased", family: "word", dim: 768 },
  { id: "bert-large-cased", family: "word", dim: 1024 },
  { id: "roberta-large", family: "word", dim: 1024 },

  { id: "paraphrase-TinyBERT-L6-v2", family: "sbert", dim: 768 },
  { id: "paraphrase-distilroberta-base-v2", family: "sbert", dim: 768 },
  { id: "paraphrase-mpnet-base-v2", family: "sbert", dim: 768 },
  { id: "paraphrase-multilingual-mpnet-base-v2", family: "sbert", dim: 768 },
  { id: "paraphrase-MiniLM-L12-v2", family: "sbert", dim: 384 },
  { id: "paraphrase-MiniLM-L6-v2", family: "sbert", dim: 384 },
  { id: "paraphrase-albert-small-v2", family: "sbert", dim: 768 },
  { id: "paraphrase-multilingual-MiniLM-L12-v2", family: "sbert", dim: 384 },
  { id: "paraphrase-MiniLM-L3-v2", family: "sbert", dim: 384 },
  { id: "nli-mpnet-base-v2", family: "sbert", dim: 768 },
  { id: "nli-roberta-base-v2", family: "sbert", dim: 768 },
  { id: "nli-distilroberta-base-v2", family: "sbert", dim: 768 },
  { id: "distiluse-base-multilingual-cased-v1", family: "sbert", dim: 512 },
  { id: "stsb-mpnet-base-v2", family: "sbert", dim: 768 },
  { id: "stsb-distilroberta-base-v2", family: "sbert", dim: 768 },
  { id: "distiluse-base-multilingual-cased-v2", family: "sbert", dim: 512 },
  { id: "stsb-roberta-base-v2", family: "sbert", dim: 768 },

  { id: "average_word_embeddings_glove.6B.300d", family: "classical", dim: 300 },
  { id: "average_word_embeddings_komninos", family: "classical", dim: 300 },
];

export function listModels(): readonly ModelInfo[] {
  return MODEL_ROSTER;
}

export function findModel(id: string): ModelInfo {
  const model = MODEL_ROSTER.find((m) => m.id === id);
  if (!model) {
    throw new Error(`unknown model id ${JSON.stringify(id)}; see listModels()`);
  }
  return model;
}
