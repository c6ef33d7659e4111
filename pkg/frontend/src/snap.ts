/** Selection snapping: mouse selections become clean markable spans.
 *
 * A selection expands outward to whitespace-delimited token boundaries,
 * then sentence punctuation hanging off the final token is excluded
 * (annotators select phrases, not the period after them).
 */

const TRAILING_PUNCT = new Set(['.', ',', ';', ':', '!', '?']);

function isSpace(ch: string): boolean {
  return /\s/.test(ch);
}

export function snapToTokens(
  text: string, start: number, end: number,
): { start: number; end: number } | null {
  if (text.length === 0) return null;
  start = Math.max(0, Math.min(start, text.length));
  end = Math.max(0, Math.min(end, text.length));
  if (end < start) [start, end] = [end, start];

  if (start === end) {
    // caret click selects the token under (or just before) the caret
    if (start < text.length && !isSpace(text[start])) {
      end = start + 1;
    } else if (start > 0 && !isSpace(text[start - 1])) {
      start -= 1;
    } else {
      return null;
    }
  } else {
    // flanking whitespace inside the drag is not part of the intent
    while (start < end && isSpace(text[start])) start++;
    while (end > start && isSpace(text[end - 1])) end--;
    if (start === end) return null;   // whitespace-only drag
  }

  // expand outward to whitespace-delimited token boundaries
  while (start > 0 && !isSpace(text[start - 1])) start--;
  while (end < text.length && !isSpace(text[end])) end++;

  // drop sentence punctuation glued to the last token
  while (end > start + 1 && TRAILING_PUNCT.has(text[end - 1])) end--;

  return end > start ? { start, end } : null;
}

/** True when the new span crosses (partially overlaps) or duplicates an
 * existing one. Strict nesting and disjointness are both fine. */
export function violatesNesting(
  spans: { start: number; end: number }[], start: number, end: number,
): boolean {
  for (const s of spans) {
    if (s.start === start && s.end === end) return true;
    const disjoint = end <= s.start || s.end <= start;
    const nested = (s.start <= start && end <= s.end) || (start <= s.start && s.end <= end);
    if (!disjoint && !nested) return true;
  }
  return false;
}
