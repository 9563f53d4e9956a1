/**
 * DOM bindings: renders the studio model into the pane layout (action menu,
 * operator palette, playground track, properties pane, preview pane,
 * visualization pane) and routes user events back into the model.
 */

import { renderHistogram } from "./histogram.js";
import { buildPalette } from "./palette.js";
import type { BlockStudio } from "./studio.js";
import type { ContoursDoc, HistogramDoc, ParamSpecDoc } from "./types.js";

const BLOCK_MIME = "application/x-block-op";
const REORDER_MIME = "application/x-block-index";

export class StudioView {
  private paletteEl: HTMLElement;
  private playgroundEl: HTMLElement;
  private propertiesEl: HTMLElement;
  private previewEl: HTMLElement;
  private visualizationEl: HTMLElement;
  private statusEl: HTMLElement;
  private undoBtn: HTMLButtonElement;
  private redoBtn: HTMLButtonElement;
  private runBtn: HTMLButtonElement;

  constructor(private readonly root: HTMLElement, private readonly studio: BlockStudio) {
    root.innerHTML = `
      <header class="action-menu">
        <span class="brand">block studio</span>
        <button data-role="run">Run</button>
        <button data-role="undo">Undo</button>
        <button data-role="redo">Redo</button>
        <button data-role="export">Export</button>
        <label class="upload">Source image <input type="file" accept="image/png" data-role="source"></label>
        <span data-role="status" class="status"></span>
      </header>
      <main class="panes">
        <aside class="palette" data-role="palette"></aside>
        <section class="playground" data-role="playground"></section>
        <aside class="properties" data-role="properties"></aside>
      </main>
      <footer class="bottom">
        <section class="preview" data-role="preview"></section>
        <section class="visualization" data-role="visualization"></section>
      </footer>`;
    this.paletteEl = this.q("palette");
    this.playgroundEl = this.q("playground");
    this.propertiesEl = this.q("properties");
    this.previewEl = this.q("preview");
    this.visualizationEl = this.q("visualization");
    this.statusEl = this.q("status");
    this.undoBtn = this.q("undo") as HTMLButtonElement;
    this.redoBtn = this.q("redo") as HTMLButtonElement;
    this.runBtn = this.q("run") as HTMLButtonElement;

    this.runBtn.addEventListener("click", () => void this.studio.run());
    this.undoBtn.addEventListener("click", () => void this.studio.undo().then(() => this.renderAll()));
    this.redoBtn.addEventListener("click", () => void this.studio.redo().then(() => this.renderAll()));
    this.q("export").addEventListener("click", () => this.downloadTemplate());
    (this.q("source") as HTMLInputElement).addEventListener("change", (ev) => {
      const input = ev.target as HTMLInputElement;
      const file = input.files?.[0];
      if (file) void this.uploadSource(file);
    });

    this.renderPalette();
    this.renderAll();
  }

  private q(role: string): HTMLElement {
    return this.root.querySelector(`[data-role="${role}"]`) as HTMLElement;
  }

  renderAll(): void {
    this.renderPlayground();
    this.renderProperties();
    this.renderPreview();
    this.renderControls();
  }

  // -- palette ---------------------------------------------------------------

  private renderPalette(): void {
    this.paletteEl.innerHTML = "";
    for (const group of buildPalette(this.studio.catalog)) {
      const header = document.createElement("h3");
      header.textContent = group.category;
      this.paletteEl.appendChild(header);
      for (const entry of group.entries) {
        const el = document.createElement("div");
        el.className = `palette-entry socket-${entry.socket} plug-${entry.plug}`;
        el.textContent = entry.displayName;
        el.title = entry.description;
        el.draggable = true;
        el.dataset.op = entry.op;
        el.addEventListener("dragstart", (ev) => {
          ev.dataTransfer?.setData(BLOCK_MIME, entry.op);
        });
        // double-click appends to the end, for keyboard-averse beginners
        el.addEventListener("dblclick", () => {
          void this.studio.dropBlock(entry.op, this.studio.blocks.length).then(() => this.renderAll());
        });
        this.paletteEl.appendChild(el);
      }
    }
  }

  // -- playground --------------------------------------------------------------

  private renderPlayground(): void {
    this.playgroundEl.innerHTML = "";
    const track = document.createElement("div");
    track.className = "track";
    track.appendChild(this.dropSlot(0));
    this.studio.blocks.forEach((block, index) => {
      const spec = this.studio.spec(block.op);
      const card = document.createElement("div");
      card.className = "block-card";
      if (index === this.studio.selected) card.classList.add("selected");
      card.classList.add(`socket-${spec.input_format.toLowerCase().replace("_", "-")}`);
      card.draggable = true;
      card.innerHTML = `<span class="name">${spec.display_name}</span>
        <span class="params">${summarizeParams(block.params)}</span>
        <button class="remove" title="remove">x</button>`;
      card.addEventListener("click", () => {
        this.studio.selected = index;
        this.renderAll();
      });
      card.addEventListener("dragstart", (ev) => {
        ev.dataTransfer?.setData(REORDER_MIME, String(index));
      });
      (card.querySelector(".remove") as HTMLButtonElement).addEventListener("click", (ev) => {
        ev.stopPropagation();
        void this.studio.removeBlock(index).then(() => this.renderAll());
      });
      track.appendChild(card);
      if (this.studio.inlineMessage && this.studio.inlineMessage.index === index) {
        track.appendChild(this.violationMessage());
      }
      track.appendChild(this.dropSlot(index + 1));
    });
    // a rejected drop at the end anchors past the last block
    if (this.studio.inlineMessage && this.studio.inlineMessage.index >= this.studio.blocks.length) {
      track.appendChild(this.violationMessage());
    }
    this.playgroundEl.appendChild(track);
  }

  private violationMessage(): HTMLElement {
    const msg = document.createElement("div");
    msg.className = "inline-violation";
    msg.textContent = this.studio.inlineMessage?.text ?? "";
    return msg;
  }

  private dropSlot(position: number): HTMLElement {
    const slot = document.createElement("div");
    slot.className = "drop-slot";
    slot.addEventListener("dragover", (ev) => {
      ev.preventDefault();
      slot.classList.add("active");
    });
    slot.addEventListener("dragleave", () => slot.classList.remove("active"));
    slot.addEventListener("drop", (ev) => {
      ev.preventDefault();
      slot.classList.remove("active");
      const op = ev.dataTransfer?.getData(BLOCK_MIME);
      const reorder = ev.dataTransfer?.getData(REORDER_MIME);
      if (op) {
        void this.studio.dropBlock(op, position).then(() => this.renderAll());
      } else if (reorder) {
        const from = Number(reorder);
        const to = position > from ? position - 1 : position;
        void this.studio.reorderBlock(from, to).then(() => this.renderAll());
      }
    });
    return slot;
  }

  // -- properties ---------------------------------------------------------------

  private renderProperties(): void {
    this.propertiesEl.innerHTML = "";
    const index = this.studio.selected;
    if (index === null || !this.studio.blocks[index]) {
      this.propertiesEl.innerHTML = `<p class="hint">Select a block to edit its parameters.</p>`;
      return;
    }
    const block = this.studio.blocks[index];
    const spec = this.studio.spec(block.op);
    const title = document.createElement("h3");
    title.textContent = spec.display_name;
    const description = document.createElement("p");
    description.textContent = spec.description;
    const example = document.createElement("p");
    example.className = "example";
    example.textContent = spec.example;
    this.propertiesEl.append(title, description, example);

    for (const param of spec.params) {
      this.propertiesEl.appendChild(this.paramEditor(index, param, block.params[param.name]));
    }
  }

  private paramEditor(index: number, param: ParamSpecDoc, value: unknown): HTMLElement {
    const row = document.createElement("label");
    row.className = "param-row";
    row.textContent = param.name;
    let input: HTMLInputElement | HTMLSelectElement;
    if (param.type === "enum") {
      input = document.createElement("select");
      for (const choice of param.choices) {
        const opt = document.createElement("option");
        opt.value = String(choice);
        opt.textContent = String(choice);
        if (choice === value) opt.selected = true;
        input.appendChild(opt);
      }
    } else {
      input = document.createElement("input");
      if (param.type === "int" || param.type === "real") {
        input.type = "number";
        if (param.type === "int") input.step = param.odd ? "2" : "1";
        if (param.minimum !== null) input.min = String(param.minimum);
        if (param.maximum !== null) input.max = String(param.maximum);
        input.value = String(value);
      } else {
        input.type = "text";
        input.value = Array.isArray(value) ? value.join(",") : String(value);
      }
    }
    input.title = param.description;
    input.addEventListener("change", () => {
      const parsed = parseParamValue(param, input.value);
      void this.studio.editParams(index, { [param.name]: parsed }).then(() => this.renderAll());
    });
    row.appendChild(input);
    return row;
  }

  // -- preview & visualization ----------------------------------------------------

  private renderPreview(): void {
    this.previewEl.innerHTML = "";
    const previews = this.studio.previews;
    if (previews.length === 0) {
      this.previewEl.innerHTML = `<p class="hint">Upload a source image and run the pipeline.</p>`;
      this.visualizationEl.innerHTML = "";
      return;
    }
    const scrubber = document.createElement("input");
    scrubber.type = "range";
    scrubber.min = "0";
    scrubber.max = String(previews.length - 1);
    const current = this.studio.currentPreview();
    const stage = current ? current.stage : previews.length - 1;
    scrubber.value = String(stage);
    scrubber.addEventListener("input", () => {
      this.studio.viewedStage = Number(scrubber.value);
      this.renderPreview();
    });
    const label = document.createElement("div");
    label.className = "stage-label";
    const badges = previews
      .map((p) => (p.kind === "ERROR" ? `<b class="err">${p.stage}:${p.op}</b>` : `${p.stage}:${p.op}`))
      .join(" > ");
    label.innerHTML = badges;

    const pane = document.createElement("div");
    pane.className = "preview-pane";
    if (current) {
      if (current.kind === "IMAGE") {
        const img = document.createElement("img");
        // cache-bust: payloads change after each re-execution
        img.src = `${this.studio.previewUrl(current.stage)}?run=${this.studio.executeCalls}`;
        img.alt = `${current.op} output`;
        pane.appendChild(img);
      } else if (current.kind === "ERROR") {
        pane.innerHTML = `<p class="error">stage ${current.stage} ${current.op}: ${current.error}</p>`;
      } else {
        pane.innerHTML = `<p class="hint">${current.kind} recorded - see the visualization pane.</p>`;
        void this.renderVisualization(current.stage, current.kind);
      }
    }
    this.previewEl.append(label, scrubber, pane);
  }

  private async renderVisualization(stage: number, kind: "HISTOGRAM" | "CONTOURS"): Promise<void> {
    const doc = await fetchPreviewJson(this.studio, stage);
    this.visualizationEl.innerHTML = "";
    const canvas = document.createElement("canvas");
    canvas.width = 512;
    canvas.height = 180;
    this.visualizationEl.appendChild(canvas);
    if (kind === "HISTOGRAM") {
      renderHistogram(canvas, doc as HistogramDoc);
    } else {
      renderContours(canvas, doc as ContoursDoc);
    }
  }

  private renderControls(): void {
    this.undoBtn.disabled = !this.studio.canUndo();
    this.redoBtn.disabled = !this.studio.canRedo();
    this.runBtn.disabled = !this.studio.readyToExecute();
    this.statusEl.textContent = this.studio.sourceUploaded
      ? `${this.studio.blocks.length} block(s)`
      : "no source image";
  }

  // -- actions -----------------------------------------------------------------

  private async uploadSource(file: File): Promise<void> {
    const bytes = new Uint8Array(await file.arrayBuffer());
    await this.studio.uploadSource(bytes);
    if (this.studio.readyToExecute()) await this.studio.run();
    this.renderAll();
  }

  private downloadTemplate(): void {
    const doc = this.studio.exportTemplate();
    const blob = new Blob([JSON.stringify(doc, null, 2)], { type: "application/json" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "pipeline.json";
    a.click();
    URL.revokeObjectURL(a.href);
  }
}

function summarizeParams(params: Record<string, unknown>): string {
  const parts = Object.entries(params).map(([k, v]) => `${k}=${Array.isArray(v) ? v.join(",") : v}`);
  return parts.join(" ");
}

function parseParamValue(param: ParamSpecDoc, raw: string): unknown {
  switch (param.type) {
    case "int": {
      const n = Number(raw);
      return Number.isInteger(n) ? n : raw;
    }
    case "real": {
      const n = Number(raw);
      return Number.isNaN(n) ? raw : n;
    }
    case "enum": {
      const match = param.choices.find((c) => String(c) === raw);
      return match !== undefined ? match : raw;
    }
    case "coords":
    case "color":
      return raw.split(",").map((v) => Number(v.trim()));
    default:
      return raw;
  }
}

async function fetchPreviewJson(studio: BlockStudio, stage: number): Promise<unknown> {
  const response = await fetch(`${studio.previewUrl(stage)}`);
  return response.json();
}

function renderContours(canvas: HTMLCanvasElement, doc: ContoursDoc): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const scale = Math.min(canvas.width / doc.width, canvas.height / doc.height);
  ctx.strokeStyle = "#d62728";
  ctx.lineWidth = 1;
  for (const contour of doc.contours) {
    if (contour.length === 0) continue;
    ctx.beginPath();
    const [x0, y0] = contour[0];
    ctx.moveTo((x0 + 0.5) * scale, (y0 + 0.5) * scale);
    for (const [x, y] of contour.slice(1)) {
      ctx.lineTo((x + 0.5) * scale, (y + 0.5) * scale);
    }
    ctx.closePath();
    ctx.stroke();
  }
}
