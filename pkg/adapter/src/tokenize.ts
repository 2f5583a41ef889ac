/**
 * Whitespace/punctuation word tokenization and subword pooling helpers.
 *
 * Word tokens keep internal apostrophes and hyphens; every other
 * punctuation character becomes a token of its own. Joining surfaces with
 * single spaces reconstructs the input up to whitespace.
 */

const WORD_OR_PUNCT = /[\p{L}\p{N}](?:[\p{L}\p{N}'’-]*[\p{L}\p{N}])?|[^\s]/gu;

export function wordTokenize(text: string): string[] {
  return text.match(WORD_OR_PUNCT) ?? [];
}

export function meanPool(vectors: readonly (readonly number[])[]): number[] {
  if (vectors.length === 0) {
    throw new Error("cannot pool an empty vector list");
  }
  const dim = vectors[0].length;
  const out = new Array<number>(dim).fill(0);
  for (const vec of vectors) {
    if (vec.length !== dim) {
      throw new Error(`inconsistent vector dimensions: ${vec.length} vs ${dim}`);
    }
    for (let i = 0; i < dim; i++) {
      out[i] += vec[i];
    }
  }
  for (let i = 0; i < dim; i++) {
    out[i] /= vectors.length;
  }
  return out;
}

/**
 * Pool a flat sequence of subword-piece vectors back onto words.
 * `pieceCounts[w]` says how many consecutive pieces belong to word w;
 * the counts must consume every piece vector.
 */
export function poolPiecesToWords(
  pieceVectors: readonly (readonly number[])[],
  pieceCounts: readonly number[],
): number[][] {
  const total = pieceCounts.reduce((a, b) => a + b, 0);
  if (total !== pieceVectors.length) {
    throw new Error(`piece counts cover ${total} pieces but ${pieceVectors.length} were given`);
  }
  const words: number[][] = [];
  let cursor = 0;
  for (const count of pieceCounts) {
    if (count < 1) {
      throw new Error("every word must own at least one piece");
    }
    words.push(meanPool(pieceVectors.slice(cursor, cursor + count)));
    cursor += count;
  }
  return words;
}
