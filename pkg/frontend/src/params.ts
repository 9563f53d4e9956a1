/** Client-side parameter checks mirroring the server's schema. */

import type { ParamSpecDoc } from "./types.js";

export function defaultParams(params: ParamSpecDoc[]): Record<string, unknown> {
  const out: Record<string, unknown> = {};
  for (const p of params) {
    out[p.name] = p.default;
  }
  return out;
}

/** First problem with the value, or null when it satisfies the schema. */
export function paramProblem(spec: ParamSpecDoc, value: unknown): string | null {
  switch (spec.type) {
    case "int":
      if (typeof value !== "number" || !Number.isInteger(value)) {
        return `${spec.name} must be an integer`;
      }
      if (spec.odd && value % 2 === 0) {
        return `${spec.name} must be odd, got ${value}`;
      }
      break;
    case "real":
      if (typeof value !== "number" || Number.isNaN(value)) {
        return `${spec.name} must be a number`;
      }
      break;
    case "string":
      if (typeof value !== "string") return `${spec.name} must be a string`;
      return null;
    case "enum":
      if (!spec.choices.some((c) => c === value)) {
        return `${spec.name} must be one of ${spec.choices.join(", ")}`;
      }
      return null;
    case "coords":
      if (!Array.isArray(value) || !value.every((v) => Number.isInteger(v))) {
        return `${spec.name} must be a list of integers`;
      }
      return null;
    case "color": {
      const ok =
        Array.isArray(value) &&
        value.length === 3 &&
        value.every((v) => Number.isInteger(v) && v >= 0 && v <= 255);
      return ok ? null : `${spec.name} must be [r, g, b] with samples in 0..255`;
    }
  }
  const n = value as number;
  if (spec.minimum !== null) {
    if (spec.exclusive_min && n <= spec.minimum) {
      return `${spec.name} must be > ${spec.minimum}`;
    }
    if (!spec.exclusive_min && n < spec.minimum) {
      return `${spec.name} must be >= ${spec.minimum}`;
    }
  }
  if (spec.maximum !== null && n > spec.maximum) {
    return `${spec.name} must be <= ${spec.maximum}`;
  }
  return null;
}

export function firstProblem(
  specs: ParamSpecDoc[],
  values: Record<string, unknown>,
): string | null {
  const known = new Map(specs.map((s) => [s.name, s]));
  for (const [name, value] of Object.entries(values)) {
    const spec = known.get(name);
    if (!spec) return `unknown parameter ${name}`;
    const problem = paramProblem(spec, value);
    if (problem) return problem;
  }
  return null;
}
