/** Stable chain colors: the same chain id gets the same color in every
 * session, so annotators recognize entities across reloads. */

function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

export function chainColor(chainId: string): string {
  const hue = fnv1a(chainId) % 360;
  return `hsl(${hue}, 70%, 78%)`;
}

export function chainBorder(chainId: string): string {
  const hue = fnv1a(chainId) % 360;
  return `hsl(${hue}, 60%, 45%)`;
}
