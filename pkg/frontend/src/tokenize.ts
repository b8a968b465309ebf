/**
 * Client-side word splitting for the submit gate.
 * Mirrors the service's tokenizer: lowercase, split on whitespace, strip
 * punctuation off word edges (interior punctuation survives, so contractions
 * and hyphenated words count as one word).
 */

const EDGE_CHARS = new Set("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~");

export function tokenize(text: string): string[] {
  const words: string[] = [];
  for (const raw of text.toLowerCase().split(/\s+/)) {
    let start = 0;
    let end = raw.length;
    while (start < end && EDGE_CHARS.has(raw[start]!)) start += 1;
    while (end > start && EDGE_CHARS.has(raw[end - 1]!)) end -= 1;
    if (end > start) words.push(raw.slice(start, end));
  }
  return words;
}
