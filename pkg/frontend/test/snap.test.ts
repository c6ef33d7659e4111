import { describe, expect, it } from 'vitest';

import { snapToTokens, violatesNesting } from '../src/snap.js';

const TEXT = 'A sister of alleged racketeer James J. (Whitey) Bulger has no legal '
  + 'basis to oppose government efforts to confiscate his lottery winnings. '
  + 'These winnings are estimated...\n';

describe('snapToTokens', () => {
  it('expands a partial drag to whole tokens', () => {
    const start = TEXT.indexOf('James') + 2;
    const end = TEXT.indexOf('Bulger') + 3;
    expect(snapToTokens(TEXT, start, end)).toEqual({
      start: TEXT.indexOf('James'),
      end: TEXT.indexOf('Bulger') + 'Bulger'.length,
    });
  });

  it('keeps an already token-aligned selection', () => {
    const start = TEXT.indexOf('his lottery');
    expect(snapToTokens(TEXT, start, start + 3)).toEqual({ start, end: start + 3 });
  });

  it('excludes sentence punctuation glued to the last token', () => {
    const start = TEXT.indexOf('his lottery') + 1;
    const end = TEXT.indexOf('winnings.') + 4;
    const snapped = snapToTokens(TEXT, start, end);
    expect(snapped).toEqual({
      start: TEXT.indexOf('his lottery'),
      end: TEXT.indexOf('winnings.') + 'winnings'.length,
    });
    expect(TEXT.slice(snapped!.start, snapped!.end)).toBe('his lottery winnings');
  });

  it('keeps interior punctuation like (Whitey)', () => {
    const start = TEXT.indexOf('(Whitey)');
    const snapped = snapToTokens(TEXT, start + 1, start + 3);
    expect(TEXT.slice(snapped!.start, snapped!.end)).toBe('(Whitey)');
  });

  it('swaps a backwards selection', () => {
    const start = TEXT.indexOf('These') + 1;
    const end = TEXT.indexOf('These') + 4;
    expect(snapToTokens(TEXT, end, start)).toEqual(snapToTokens(TEXT, start, end));
  });

  it('rejects whitespace-only selections', () => {
    const gap = TEXT.indexOf(' of');
    expect(snapToTokens(TEXT, gap, gap + 1)).toBeNull();
    expect(snapToTokens('', 0, 0)).toBeNull();
  });

  it('clamps out-of-range offsets', () => {
    const snapped = snapToTokens('one two', -5, 100);
    expect(snapped).toEqual({ start: 0, end: 7 });
  });
});

describe('violatesNesting', () => {
  const spans = [{ start: 10, end: 20 }, { start: 30, end: 40 }];

  it('allows disjoint spans', () => {
    expect(violatesNesting(spans, 21, 29)).toBe(false);
  });

  it('allows strictly nested spans either way', () => {
    expect(violatesNesting(spans, 12, 18)).toBe(false);
    expect(violatesNesting(spans, 5, 25)).toBe(false);
  });

  it('rejects crossing spans', () => {
    expect(violatesNesting(spans, 15, 35)).toBe(true);
    expect(violatesNesting(spans, 5, 15)).toBe(true);
  });

  it('rejects duplicate spans', () => {
    expect(violatesNesting(spans, 10, 20)).toBe(true);
  });
});
