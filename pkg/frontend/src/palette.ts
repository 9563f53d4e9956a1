/** Palette entries: catalog projection grouped by category. */

import { plugProfile, socketProfile } from "./connectors.js";
import type { BlockSpecDoc, CatalogDoc } from "./types.js";

export interface PaletteEntry {
  op: string;
  displayName: string;
  category: string;
  socket: string;
  plug: string;
  description: string;
  spec: BlockSpecDoc;
}

export interface PaletteGroup {
  category: string;
  entries: PaletteEntry[];
}

export function buildPalette(catalog: CatalogDoc): PaletteGroup[] {
  const groups: PaletteGroup[] = [];
  for (const spec of catalog.specs) {
    const entry: PaletteEntry = {
      op: spec.op,
      displayName: spec.display_name,
      category: spec.category,
      socket: socketProfile(spec),
      plug: plugProfile(spec),
      description: spec.description,
      spec,
    };
    const group = groups.find((g) => g.category === spec.category);
    if (group) {
      group.entries.push(entry);
    } else {
      groups.push({ category: spec.category, entries: [entry] });
    }
  }
  return groups;
}
