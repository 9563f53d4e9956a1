/** Server document shapes, mirroring the imagelab service JSON exactly. */

export type InputFormat = "NONE" | "ANY_IMAGE" | "GRAY" | "BINARY";
export type OutputFormat = "COLOR" | "GRAY" | "BINARY" | "PASS_THROUGH" | "DATA_PRODUCT";
export type ParamType = "int" | "real" | "string" | "enum" | "coords" | "color";

export interface ParamSpecDoc {
  name: string;
  type: ParamType;
  default: unknown;
  minimum: number | null;
  maximum: number | null;
  exclusive_min: boolean;
  odd: boolean;
  choices: unknown[];
  description: string;
}

export interface BlockSpecDoc {
  op: string;
  display_name: string;
  category: string;
  is_source: boolean;
  input_format: InputFormat;
  output_format: OutputFormat;
  requires_contours: boolean;
  description: string;
  example: string;
  params: ParamSpecDoc[];
}

export interface CatalogDoc {
  version: number;
  specs: BlockSpecDoc[];
}

export interface BlockDoc {
  id: string;
  op: string;
  params: Record<string, unknown>;
}

export interface PipelineDoc {
  version: 1;
  blocks: BlockDoc[];
}

export interface ViolationDoc {
  rule: string;
  code: string;
  block_index: number;
  message: string;
}

export interface PreviewDescriptor {
  stage: number;
  op: string;
  kind: "IMAGE" | "HISTOGRAM" | "CONTOURS" | "ERROR";
  width?: number;
  height?: number;
  format?: string;
  error?: string;
}

export interface ExecuteResponse {
  recomputed_from: number;
  previews: PreviewDescriptor[];
}

export interface HistogramDoc {
  kind: "HISTOGRAM";
  channels: number;
  total: number;
  bins: number[][];
}

export interface ContoursDoc {
  kind: "CONTOURS";
  width: number;
  height: number;
  contours: [number, number][][];
}

export interface SourceMetadata {
  width: number;
  height: number;
  format: string;
}

export interface ErrorBody {
  code: string;
  message: string;
  details: Record<string, unknown>;
}
