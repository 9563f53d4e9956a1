/**
 * The connector dockability matrix must equal the server's format relation
 * for every catalog pair. The server side of the comparison is measured by
 * actually submitting pipelines and reading the rule engine's verdict.
 */

import { describe, expect, inject, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { canDock, minimalSequenceFor, stateAfter } from "../src/connectors.js";
import type { BlockSpecDoc, CatalogDoc, PipelineDoc } from "../src/types.js";

function pipelineDoc(specs: BlockSpecDoc[], extra?: BlockSpecDoc): PipelineDoc {
  const seq = extra ? [...specs, extra] : specs;
  return {
    version: 1,
    blocks: seq.map((spec, i) => ({
      id: `b${i}`,
      op: spec.op,
      params: Object.fromEntries(spec.params.map((p) => [p.name, p.default])),
    })),
  };
}

describe("connector dockability", () => {
  it("matrix equals the server's format relation for every catalog pair", async () => {
    const api = new ApiClient(inject("baseUrl"));
    const catalog: CatalogDoc = await api.catalog();
    const sessionId = await api.createSession();

    for (const prev of catalog.specs) {
      const context = minimalSequenceFor(prev, catalog);
      // the canonical context itself must be server-valid
      const contextResult = await api.putPipeline(sessionId, pipelineDoc(context));
      expect(contextResult.ok, `context for ${prev.op} rejected`).toBe(true);

      for (const next of catalog.specs) {
        const clientDock = canDock(prev, next, catalog);
        const result = await api.putPipeline(sessionId, pipelineDoc(context, next));
        let serverDock: boolean;
        if (result.ok) {
          serverDock = true;
        } else {
          // only format violations at the appended index count: duplicate and
          // source-position rules are not part of the format relation
          const formatViolation = result.violations.some(
            (v) => v.code === "FORMAT_MISMATCH" && v.block_index === context.length,
          );
          serverDock = !formatViolation;
        }
        expect(clientDock, `${prev.op} -> ${next.op}`).toBe(serverDock);
      }
    }
  });

  it("derives socket compatibility from the catalog, not per-op tables", async () => {
    const api = new ApiClient(inject("baseUrl"));
    const catalog = await api.catalog();
    const byOp = new Map(catalog.specs.map((s) => [s.op, s]));
    const gray = byOp.get("TO_GRAYSCALE")!;
    const canny = byOp.get("CANNY")!;
    const read = byOp.get("READ_IMAGE")!;
    expect(canDock(gray, canny, catalog)).toBe(true);
    expect(canDock(read, canny, catalog)).toBe(false); // COLOR into GRAY socket
    expect(stateAfter([read, gray]).format).toBe("GRAY");
  });
});
