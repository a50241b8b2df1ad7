// Stable category colors: hash the top-level taxonomy category into a
// fixed palette so the same category gets the same color in every session
// without any server coordination.

import { Taxonomy } from "./protocol";

export const PALETTE = [
  "#e6194b",
  "#3cb44b",
  "#ffe119",
  "#4363d8",
  "#f58231",
  "#911eb4",
  "#46f0f0",
  "#f032e6",
  "#bcf60c",
  "#fabebe",
  "#008080",
  "#e6beff",
];

// the ancestor sitting directly below the taxonomy root
export function topCategory(label: string, taxonomy: Taxonomy): string {
  let cls = label;
  const seen = new Set<string>();
  while (
    taxonomy.parent[cls] !== undefined &&
    taxonomy.parent[cls] !== taxonomy.root &&
    !seen.has(cls)
  ) {
    seen.add(cls);
    cls = taxonomy.parent[cls];
  }
  return cls;
}

function hashString(s: string): number {
  let h = 5381;
  for (let i = 0; i < s.length; i++) {
    h = ((h << 5) + h + s.charCodeAt(i)) >>> 0;
  }
  return h;
}

export function categoryColor(label: string, taxonomy: Taxonomy): string {
  return PALETTE[hashString(topCategory(label, taxonomy)) % PALETTE.length];
}
