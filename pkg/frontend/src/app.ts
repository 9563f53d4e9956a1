/** Entry point: connect to the service and mount the studio. */

import { ApiClient } from "./api.js";
import { connectStudio } from "./studio.js";
import { StudioView } from "./view.js";

const DEFAULT_BASE = "http://127.0.0.1:8650";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const params = new URLSearchParams(window.location.search);
  const baseUrl = params.get("service") ?? DEFAULT_BASE;
  const api = new ApiClient(baseUrl);
  let view: StudioView | null = null;
  try {
    const studio = await connectStudio(api, {
      onPipelineChanged: () => view?.renderAll(),
      onPreviews: () => view?.renderAll(),
      onInlineMessage: () => view?.renderAll(),
    });
    view = new StudioView(root, studio);
  } catch (err) {
    root.innerHTML = `<div class="offline-banner">
      Could not reach the imagelab service at ${baseUrl}.
      Start it with <code>imagelab-service</code> and reload
      (or pass <code>?service=http://host:port</code>).
      <button id="retry">Retry</button></div>`;
    document.getElementById("retry")?.addEventListener("click", () => void boot());
    console.error(err);
  }
}

void boot();
