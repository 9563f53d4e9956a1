/**
 * Connector shapes and dockability, derived entirely from the catalog
 * document. The format relation here must match the server's rule engine;
 * nothing in this file is hand-maintained per operator.
 */

import type { BlockSpecDoc, CatalogDoc } from "./types.js";

export type AbstractFormat = "EMPTY" | "COLOR" | "GRAY" | "BINARY";

export interface FormatState {
  format: AbstractFormat;
  contoursAvailable: boolean;
}

export const INITIAL_STATE: FormatState = { format: "EMPTY", contoursAvailable: false };

/** Abstract state after a block runs, assuming it was accepted. */
export function advance(state: FormatState, spec: BlockSpecDoc): FormatState {
  if (spec.is_source) {
    return { ...state, format: "COLOR" };
  }
  if (spec.output_format === "PASS_THROUGH" || spec.output_format === "DATA_PRODUCT") {
    if (spec.op === "FIND_CONTOURS") {
      return { ...state, contoursAvailable: true };
    }
    return state;
  }
  return { ...state, format: spec.output_format };
}

export function inputSatisfied(state: FormatState, spec: BlockSpecDoc): boolean {
  if (spec.requires_contours && !state.contoursAvailable) {
    return false;
  }
  switch (spec.input_format) {
    case "NONE":
      return true;
    case "ANY_IMAGE":
      return state.format !== "EMPTY";
    case "GRAY":
      return state.format === "GRAY" || state.format === "BINARY";
    case "BINARY":
      return state.format === "BINARY";
  }
}

export function stateAfter(specs: BlockSpecDoc[]): FormatState {
  let state = INITIAL_STATE;
  for (const spec of specs) {
    state = advance(state, spec);
  }
  return state;
}

/** Socket (input) profile class for rendering puzzle notches. */
export function socketProfile(spec: BlockSpecDoc): string {
  return spec.input_format.toLowerCase().replace("_", "-");
}

/** Plug (output) profile class. */
export function plugProfile(spec: BlockSpecDoc): string {
  if (spec.is_source) return "color";
  return spec.output_format.toLowerCase().replace("_", "-");
}

/**
 * Minimal valid block sequence that ends with `spec`, used both as the
 * canonical context when computing pairwise dockability and by tests.
 */
export function minimalSequenceFor(spec: BlockSpecDoc, catalog: CatalogDoc): BlockSpecDoc[] {
  const byOp = new Map(catalog.specs.map((s) => [s.op, s]));
  const need = (op: string): BlockSpecDoc => {
    const found = byOp.get(op);
    if (!found) throw new Error(`catalog is missing ${op}`);
    return found;
  };
  const binary = [need("READ_IMAGE"), need("TO_GRAYSCALE"), need("OTSU")];
  let prefix: BlockSpecDoc[];
  if (spec.requires_contours) {
    prefix = [...binary, need("FIND_CONTOURS")];
  } else {
    switch (spec.input_format) {
      case "NONE":
        prefix = [];
        break;
      case "ANY_IMAGE":
        prefix = [need("READ_IMAGE")];
        break;
      case "GRAY":
        prefix = [need("READ_IMAGE"), need("TO_GRAYSCALE")];
        break;
      case "BINARY":
        prefix = binary;
        break;
    }
  }
  if (prefix.length > 0 && prefix[prefix.length - 1].op === spec.op) {
    return prefix;
  }
  return [...prefix, spec];
}

/**
 * Pairwise format dockability: may `next` follow `prev`, with `prev` placed
 * in its minimal valid context? This is exactly the rule engine's format
 * relation; duplicate/source-position rules are enforced separately by the
 * server verdict on every edit.
 */
export function canDock(prev: BlockSpecDoc, next: BlockSpecDoc, catalog: CatalogDoc): boolean {
  const state = stateAfter(minimalSequenceFor(prev, catalog));
  return inputSatisfied(state, next);
}

export function dockabilityMatrix(catalog: CatalogDoc): Map<string, boolean> {
  const matrix = new Map<string, boolean>();
  for (const prev of catalog.specs) {
    for (const next of catalog.specs) {
      matrix.set(`${prev.op}->${next.op}`, canDock(prev, next, catalog));
    }
  }
  return matrix;
}
