/**
 * Corpus emission: read a sentence file (one sentence per line, optional
 * tab-separated gold label), embed every line, and serialize the JSONL
 * format the normcluster package consumes:
 *
 *   {"id", "text", "model_id", "tokens"?: [{"t", "v"}],
 *    "sentence_vector"?: [...], "label"?, "source_doc"?}
 *
 * Key order and number formatting are fixed, so identical inputs yield
 * byte-identical files.
 */

import { EmbeddingBackend } from "./backend.js";
import { findModel } from "./models.js";

export type OutputMode = "tokens" | "sentence" | "both";

export const CATEGORY_LABELS = ["Deontological", "Rawlsian", "Procedural", "Libertarian"] as const;

export interface AdapterRequest {
  /** Raw contents of the input file. */
  input: string;
  modelId: string;
  mode: OutputMode;
  backend: EmbeddingBackend;
  sourceDoc?: string;
}

export interface InputLine {
  text: string;
  label?: string;
}

export function parseInput(raw: string): InputLine[] {
  const lines: InputLine[] = [];
  for (const line of raw.split("\n")) {
    const trimmed = line.replace(/\r$/, "");
    if (!trimmed.trim()) {
      continue;
    }
    const tab = trimmed.indexOf("\t");
    if (tab < 0) {
      lines.push({ text: trimmed });
      continue;
    }
    const text = trimmed.slice(0, tab).trim();
    const label = trimmed.slice(tab + 1).trim();
    if (!(CATEGORY_LABELS as readonly string[]).includes(label)) {
      throw new Error(
        `bad gold label ${JSON.stringify(label)}; expected one of ${CATEGORY_LABELS.join(", ")}`,
      );
    }
    lines.push({ text, label });
  }
  if (lines.length === 0) {
    throw new Error("input contains no sentences");
  }
  return lines;
}

function renderVector(vector: readonly number[]): string {
  return "[" + vector.map((x) => JSON.stringify(x)).join(",") + "]";
}

/** Hand-rendered JSON line with a stable key order. */
function renderRecord(
  id: string,
  text: string,
  modelId: string,
  tokens: { surface: string; vector: number[] }[] | null,
  sentence: number[] | null,
  label?: string,
  sourceDoc?: string,
): string {
  const parts = [
    `"id":${JSON.stringify(id)}`,
    `"text":${JSON.stringify(text)}`,
    `"model_id":${JSON.stringify(modelId)}`,
  ];
  if (tokens) {
    const rendered = tokens.map((t) => `{"t":${JSON.stringify(t.surface)},"v":${renderVector(t.vector)}}`);
    parts.push(`"tokens":[${rendered.join(",")}]`);
  }
  if (sentence) {
    parts.push(`"sentence_vector":${renderVector(sentence)}`);
  }
  if (label) {
    parts.push(`"label":${JSON.stringify(label)}`);
  }
  if (sourceDoc) {
    parts.push(`"source_doc":${JSON.stringify(sourceDoc)}`);
  }
  return "{" + parts.join(",") + "}";
}

export async function embedCorpus(request: AdapterRequest): Promise<string> {
  const model = findModel(request.modelId);
  const lines = parseInput(request.input);
  const out: string[] = [];
  for (let i = 0; i < lines.length; i++) {
    const { text, label } = lines[i];
    const wantTokens = request.mode === "tokens" || request.mode === "both";
    const wantSentence = request.mode === "sentence" || request.mode === "both";
    const tokens = wantTokens ? await request.backend.embedTokens(model, text) : null;
    if (tokens !== null && tokens.length === 0) {
      throw new Error(`line ${i + 1} produced no tokens`);
    }
    const sentence = wantSentence ? await request.backend.embedSentence(model, text) : null;
    out.push(
      renderRecord(
        `s${String(i + 1).padStart(4, "0")}`,
        text,
        model.id,
        tokens,
        sentence,
        label,
        request.sourceDoc,
      ),
    );
  }
  return out.join("\n") + "\n";
}
