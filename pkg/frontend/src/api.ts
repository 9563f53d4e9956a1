/** Thin typed client for the imagelab HTTP service. */

import type {
  CatalogDoc,
  ErrorBody,
  ExecuteResponse,
  PipelineDoc,
  SourceMetadata,
  ViolationDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
    public readonly details: Record<string, unknown> = {},
  ) {
    super(message);
  }
}

export type PutPipelineResult =
  | { ok: true; pipeline: PipelineDoc }
  | { ok: false; violations: ViolationDoc[] };

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    return this.fetchImpl(`${this.baseUrl}${path}`, init);
  }

  private async checked(path: string, init?: RequestInit): Promise<unknown> {
    const response = await this.request(path, init);
    const body = (await response.json()) as unknown;
    if (!response.ok) {
      const err = body as ErrorBody;
      throw new ApiError(response.status, err.code, err.message, err.details);
    }
    return body;
  }

  async createSession(): Promise<string> {
    const body = (await this.checked("/api/sessions", { method: "POST" })) as {
      session_id: string;
    };
    return body.session_id;
  }

  async uploadSource(sessionId: string, png: Uint8Array): Promise<SourceMetadata> {
    return (await this.checked(`/api/sessions/${sessionId}/source`, {
      method: "POST",
      headers: { "content-type": "image/png" },
      body: png as unknown as BodyInit,
    })) as SourceMetadata;
  }

  /** Violations are a normal outcome of editing, not an exception. */
  async putPipeline(sessionId: string, doc: PipelineDoc): Promise<PutPipelineResult> {
    const response = await this.request(`/api/sessions/${sessionId}/pipeline`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(doc),
    });
    const body = (await response.json()) as Record<string, unknown>;
    if (response.ok) {
      return { ok: true, pipeline: body.pipeline as PipelineDoc };
    }
    if (response.status === 422 && body.code === "VALIDATION_FAILED") {
      const details = body.details as { violations: ViolationDoc[] };
      return { ok: false, violations: details.violations };
    }
    const err = body as unknown as ErrorBody;
    throw new ApiError(response.status, err.code, err.message, err.details);
  }

  async getPipeline(sessionId: string): Promise<PipelineDoc> {
    const body = (await this.checked(`/api/sessions/${sessionId}/pipeline`)) as {
      pipeline: PipelineDoc;
    };
    return body.pipeline;
  }

  async execute(sessionId: string): Promise<ExecuteResponse> {
    return (await this.checked(`/api/sessions/${sessionId}/execute`, {
      method: "POST",
    })) as ExecuteResponse;
  }

  previewUrl(sessionId: string, stage: number): string {
    return `${this.baseUrl}/api/sessions/${sessionId}/previews/${stage}`;
  }

  async previewJson(sessionId: string, stage: number): Promise<unknown> {
    return this.checked(`/api/sessions/${sessionId}/previews/${stage}`);
  }

  async previewBytes(sessionId: string, stage: number): Promise<Uint8Array> {
    const response = await this.request(`/api/sessions/${sessionId}/previews/${stage}`);
    if (!response.ok) {
      const err = (await response.json()) as ErrorBody;
      throw new ApiError(response.status, err.code, err.message, err.details);
    }
    return new Uint8Array(await response.arrayBuffer());
  }

  /** Returns the new pipeline, or null when the stack is empty (409). */
  async undo(sessionId: string): Promise<PipelineDoc | null> {
    return this.popHistory(sessionId, "undo");
  }

  async redo(sessionId: string): Promise<PipelineDoc | null> {
    return this.popHistory(sessionId, "redo");
  }

  private async popHistory(sessionId: string, op: "undo" | "redo") {
    const response = await this.request(`/api/sessions/${sessionId}/${op}`, {
      method: "POST",
    });
    const body = (await response.json()) as Record<string, unknown>;
    if (response.status === 409) {
      return null;
    }
    if (!response.ok) {
      const err = body as unknown as ErrorBody;
      throw new ApiError(response.status, err.code, err.message, err.details);
    }
    return body.pipeline as PipelineDoc;
  }

  async catalog(): Promise<CatalogDoc> {
    return (await this.checked("/api/catalog")) as CatalogDoc;
  }

  async listTemplates(): Promise<string[]> {
    const body = (await this.checked("/api/templates")) as { templates: string[] };
    return body.templates;
  }

  async saveTemplate(name: string, sessionId: string): Promise<void> {
    await this.checked("/api/templates", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ name, session_id: sessionId }),
    });
  }

  async loadTemplate(name: string): Promise<PipelineDoc> {
    const body = (await this.checked(`/api/templates/${name}`)) as {
      pipeline: PipelineDoc;
    };
    return body.pipeline;
  }
}
