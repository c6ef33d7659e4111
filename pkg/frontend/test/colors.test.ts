import { describe, expect, it } from 'vitest';

import { chainBorder, chainColor } from '../src/colors.js';

describe('chainColor', () => {
  it('is stable across calls', () => {
    expect(chainColor('chain-1')).toBe(chainColor('chain-1'));
    expect(chainBorder('chain-1')).toBe(chainBorder('chain-1'));
  });

  it('differs for typical neighboring ids', () => {
    const hues = new Set(['chain-1', 'chain-2', 'chain-3', 'chain-h1']
      .map((id) => chainColor(id)));
    expect(hues.size).toBeGreaterThan(1);
  });

  it('emits valid hsl strings', () => {
    expect(chainColor('anything')).toMatch(/^hsl\(\d+, 70%, 78%\)$/);
  });
});
