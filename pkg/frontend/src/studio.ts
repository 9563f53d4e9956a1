/**
 * The playground model: one linear track of placed blocks, kept in lockstep
 * with the server. Edits are optimistic; the server's verdict either
 * acknowledges them or snaps them back with the violation to show inline.
 */

import { ApiClient } from "./api.js";
import { DebouncedRunner } from "./debounce.js";
import { defaultParams, firstProblem } from "./params.js";
import type {
  BlockDoc,
  BlockSpecDoc,
  CatalogDoc,
  PipelineDoc,
  PreviewDescriptor,
  ViolationDoc,
} from "./types.js";

export interface DropResult {
  accepted: boolean;
  violation?: ViolationDoc;
}

export interface InlineMessage {
  index: number; // joint where the message is anchored
  text: string;
}

export interface StudioEvents {
  onPipelineChanged?: () => void;
  onPreviews?: (previews: PreviewDescriptor[]) => void;
  onInlineMessage?: (message: InlineMessage | null) => void;
}

export class BlockStudio {
  blocks: BlockDoc[] = [];
  selected: number | null = null;
  previews: PreviewDescriptor[] = [];
  /** Stage shown in the preview pane; null tracks the final stage. */
  viewedStage: number | null = null;
  inlineMessage: InlineMessage | null = null;
  sourceUploaded = false;

  private undoDepth = 0; // edits below the current state
  private redoDepth = 0;
  private nextBlockId = 0;
  private readonly executor: DebouncedRunner;
  private readonly byOp: Map<string, BlockSpecDoc>;

  constructor(
    private readonly api: ApiClient,
    readonly sessionId: string,
    readonly catalog: CatalogDoc,
    private readonly events: StudioEvents = {},
    debounceMs = 250,
  ) {
    this.byOp = new Map(catalog.specs.map((s) => [s.op, s]));
    this.executor = new DebouncedRunner(() => this.executeNow(), debounceMs);
  }

  get executeCalls(): number {
    return this.executor.runCount;
  }

  spec(op: string): BlockSpecDoc {
    const spec = this.byOp.get(op);
    if (!spec) throw new Error(`unknown operator ${op}`);
    return spec;
  }

  canUndo(): boolean {
    return this.undoDepth > 0;
  }

  canRedo(): boolean {
    return this.redoDepth > 0;
  }

  /** The server-acknowledged pipeline document (export payload). */
  exportTemplate(): PipelineDoc {
    return { version: 1, blocks: this.blocks.map((b) => ({ ...b, params: { ...b.params } })) };
  }

  async uploadSource(png: Uint8Array): Promise<void> {
    await this.api.uploadSource(this.sessionId, png);
    this.sourceUploaded = true;
    this.previews = [];
    this.events.onPreviews?.(this.previews);
  }

  // -- structural edits -----------------------------------------------------

  /** Drop a palette block at `position`; snaps back when the server refuses. */
  async dropBlock(op: string, position: number): Promise<DropResult> {
    const spec = this.spec(op);
    const block: BlockDoc = {
      id: `n${this.nextBlockId++}`,
      op,
      params: defaultParams(spec.params),
    };
    const attempt = [...this.blocks];
    attempt.splice(position, 0, block);
    return this.commitStructural(attempt, position, position);
  }

  async removeBlock(index: number): Promise<DropResult> {
    const attempt = this.blocks.filter((_, i) => i !== index);
    return this.commitStructural(attempt, index, null);
  }

  async reorderBlock(from: number, to: number): Promise<DropResult> {
    const attempt = [...this.blocks];
    const [moved] = attempt.splice(from, 1);
    attempt.splice(to, 0, moved);
    return this.commitStructural(attempt, to, to);
  }

  private async commitStructural(
    attempt: BlockDoc[],
    joint: number,
    selectOnOk: number | null,
  ): Promise<DropResult> {
    const result = await this.api.putPipeline(this.sessionId, {
      version: 1,
      blocks: attempt,
    });
    if (!result.ok) {
      // snap back: the optimistic change never lands in `blocks`;
      // show the violation anchored at the edited joint when there is one
      const violation =
        result.violations.find((v) => v.block_index === joint) ?? result.violations[0];
      this.setInlineMessage({ index: violation.block_index >= 0 ? violation.block_index : joint,
                              text: violation.message });
      return { accepted: false, violation };
    }
    this.blocks = result.pipeline.blocks;
    this.undoDepth += 1;
    this.redoDepth = 0;
    if (selectOnOk !== null) {
      this.selected = selectOnOk; // properties pane opens for the new block
    } else if (this.selected !== null && this.selected >= this.blocks.length) {
      this.selected = this.blocks.length ? this.blocks.length - 1 : null;
    }
    this.setInlineMessage(null);
    this.events.onPipelineChanged?.();
    // structural edits refresh the preview immediately
    if (this.readyToExecute()) {
      await this.executor.runNow();
    } else {
      this.previews = [];
      this.events.onPreviews?.(this.previews);
    }
    return { accepted: true };
  }

  // -- parameter edits --------------------------------------------------------

  /**
   * Range-check locally, PUT the new values, then refresh the preview after
   * the debounce window; a no-op edit makes no server call at all.
   */
  async editParams(index: number, values: Record<string, unknown>): Promise<DropResult> {
    const block = this.blocks[index];
    if (!block) throw new Error(`no block at ${index}`);
    const spec = this.spec(block.op);

    const merged = { ...block.params, ...values };
    if (JSON.stringify(merged) === JSON.stringify(block.params)) {
      return { accepted: true };
    }
    const problem = firstProblem(spec.params, merged);
    if (problem) {
      this.setInlineMessage({ index, text: problem });
      return {
        accepted: false,
        violation: { rule: "client-schema", code: "PARAM_INVALID", block_index: index, message: problem },
      };
    }

    const attempt = this.blocks.map((b, i) => (i === index ? { ...b, params: merged } : b));
    const result = await this.api.putPipeline(this.sessionId, { version: 1, blocks: attempt });
    if (!result.ok) {
      const violation =
        result.violations.find((v) => v.block_index === index) ?? result.violations[0];
      this.setInlineMessage({ index: violation.block_index, text: violation.message });
      return { accepted: false, violation };
    }
    this.blocks = result.pipeline.blocks;
    this.undoDepth += 1;
    this.redoDepth = 0;
    this.setInlineMessage(null);
    this.events.onPipelineChanged?.();
    if (this.readyToExecute()) {
      this.executor.trigger();
    }
    return { accepted: true };
  }

  // -- execution & previews ---------------------------------------------------

  readyToExecute(): boolean {
    return this.sourceUploaded && this.blocks.length > 0;
  }

  /** Run the pipeline now (the action menu's run command). */
  async run(): Promise<void> {
    if (!this.readyToExecute()) return;
    await this.executor.runNow();
  }

  private async executeNow(): Promise<void> {
    const response = await this.api.execute(this.sessionId);
    this.previews = response.previews;
    this.events.onPreviews?.(this.previews);
  }

  /** Descriptor for the stage the preview pane should show. */
  currentPreview(): PreviewDescriptor | null {
    if (this.previews.length === 0) return null;
    const stage = this.viewedStage === null
      ? this.previews.length - 1
      : Math.min(this.viewedStage, this.previews.length - 1);
    return this.previews[stage];
  }

  previewUrl(stage: number): string {
    return this.api.previewUrl(this.sessionId, stage);
  }

  // -- history ------------------------------------------------------------------

  async undo(): Promise<boolean> {
    const pipeline = await this.api.undo(this.sessionId);
    if (pipeline === null) return false;
    this.afterHistoryPop(pipeline);
    this.undoDepth = Math.max(0, this.undoDepth - 1);
    this.redoDepth += 1;
    return true;
  }

  async redo(): Promise<boolean> {
    const pipeline = await this.api.redo(this.sessionId);
    if (pipeline === null) return false;
    this.afterHistoryPop(pipeline);
    this.redoDepth = Math.max(0, this.redoDepth - 1);
    this.undoDepth += 1;
    return true;
  }

  private afterHistoryPop(pipeline: PipelineDoc): void {
    this.blocks = pipeline.blocks;
    if (this.selected !== null && this.selected >= this.blocks.length) {
      this.selected = this.blocks.length ? this.blocks.length - 1 : null;
    }
    this.setInlineMessage(null);
    this.previews = [];
    this.events.onPipelineChanged?.();
    this.events.onPreviews?.(this.previews);
  }

  private setInlineMessage(message: InlineMessage | null): void {
    this.inlineMessage = message;
    this.events.onInlineMessage?.(message);
  }
}

/** Create a session and a studio bound to it. */
export async function connectStudio(
  api: ApiClient,
  events: StudioEvents = {},
  debounceMs = 250,
): Promise<BlockStudio> {
  const [sessionId, catalog] = await Promise.all([api.createSession(), api.catalog()]);
  return new BlockStudio(api, sessionId, catalog, events, debounceMs);
}
