"""Pipeline execution: stage-by-stage evaluation with cached outputs,
plus template document (de)serialization.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

from . import operators as ops
from .blocks import Block, parse_kernel_string, spec_for
from .codecs import encode_png
from .errors import ExecutionPreconditionError, ImageLabError, TemplateError, UnknownOperatorError
from .raster import Image
from .rules import RuleViolation, validate

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Pipeline:
    blocks: tuple = ()
    version: int = SCHEMA_VERSION

    def __len__(self) -> int:
        return len(self.blocks)


@dataclass(frozen=True)
class WriteArtifact:
    """PNG snapshot recorded by a WRITE_IMAGE block."""

    filename: str
    data: bytes = field(repr=False)


@dataclass(frozen=True)
class StageOutput:
    op: str
    image: Image | None = None
    product: object = None  # Histogram | ContourSet | WriteArtifact
    error: str | None = None
    elapsed_ms: float = 0.0


@dataclass(frozen=True)
class PipelineState:
    """A validated pipeline plus the computed prefix of stage outputs."""

    pipeline: Pipeline = Pipeline()
    outputs: tuple = ()

    @property
    def computed_stages(self) -> int:
        return len(self.outputs)


# --- stage runners ----------------------------------------------------------


def _color_for(img: Image, rgb) -> tuple:
    """Adapt an [r, g, b] parameter to the image's channel count."""
    r, g, b = (int(v) for v in rgb)
    if img.channels == 3:
        return (r, g, b)
    luma = 0.299 * r + 0.587 * g + 0.114 * b
    return (min(255, int(luma + 0.5)),)


def _run_stage(block: Block, params: dict, image: Image, contours) -> StageOutput:
    op = block.op
    if op == "TO_GRAYSCALE":
        return StageOutput(op, ops.to_grayscale(image))
    if op == "RESIZE":
        return StageOutput(op, ops.resize(image, params["fx"], params["fy"], params["interp"]))
    if op == "ROTATE":
        return StageOutput(op, ops.rotate(image, int(params["angle"])))
    if op == "FLIP":
        return StageOutput(op, ops.flip(image, params["axis"]))
    if op == "DRAW":
        return StageOutput(op, ops.draw_primitive(
            image, params["shape"], params["geometry"],
            _color_for(image, params["color"]), params["thickness"]))
    if op == "BOX_BLUR":
        return StageOutput(op, ops.box_blur(image, params["k"]))
    if op == "GAUSSIAN_BLUR":
        sigma = params["sigma"] or None
        return StageOutput(op, ops.gaussian_blur(image, params["k"], sigma))
    if op == "MEDIAN_BLUR":
        return StageOutput(op, ops.median_blur(image, params["k"]))
    if op == "FILTER_2D":
        kernel = ops.Kernel(parse_kernel_string(params["kernel"]))
        return StageOutput(op, ops.convolve(image, kernel, params["normalize"] == "true"))
    if op == "THRESHOLD":
        return StageOutput(op, ops.threshold_binary(image, params["t"], params["maxval"]))
    if op == "OTSU":
        _, out = ops.otsu_threshold(image)
        return StageOutput(op, out)
    if op == "SOBEL":
        grad = ops.sobel(image, params["dx"], params["dy"])
        if params["dx"] and params["dy"]:
            plane = grad.magnitude
        else:
            plane = grad.gx if params["dx"] else grad.gy
        return StageOutput(op, ops.plane_to_image(plane))
    if op == "LAPLACIAN":
        return StageOutput(op, ops.laplacian(image))
    if op == "CANNY":
        return StageOutput(op, ops.canny(image, params["low"], params["high"]))
    if op == "ERODE":
        return StageOutput(op, ops.morphology(image, ops.ERODE, params["k"]))
    if op == "DILATE":
        return StageOutput(op, ops.morphology(image, ops.DILATE, params["k"]))
    if op == "DISTANCE_TRANSFORM":
        return StageOutput(op, ops.plane_to_image(ops.distance_transform(image)))
    if op == "FIND_CONTOURS":
        return StageOutput(op, image, product=ops.find_contours(image))
    if op == "DRAW_CONTOURS":
        return StageOutput(op, ops.draw_contours(image, contours, _color_for(image, params["color"])))
    if op == "HISTOGRAM":
        return StageOutput(op, image, product=ops.histogram(image))
    if op == "EQUALIZE":
        return StageOutput(op, ops.equalize_histogram(image))
    if op == "WRITE_IMAGE":
        artifact = WriteArtifact(params["filename"], encode_png(image))
        return StageOutput(op, image, product=artifact)
    raise UnknownOperatorError(f"no runner for operator {op!r}")


def execute(state: PipelineState, source: Image, from_stage: int = 0) -> PipelineState:
    """Recompute stage outputs from ``from_stage`` onward.

    Outputs below ``from_stage`` are kept as-is; a stage runtime error stops
    execution there, with the error recorded on that stage's output.
    """
    blocks = list(state.pipeline.blocks)
    violations = validate(blocks)
    if violations:
        raise ExecutionPreconditionError(
            "pipeline is not valid: " + "; ".join(v.message for v in violations)
        )
    from_stage = min(from_stage, len(state.outputs))
    outputs = list(state.outputs[:from_stage])
    while outputs and outputs[-1].error is not None:
        outputs.pop()  # never resume on top of a failed stage
    contours = None
    for out in outputs:
        if out.op == "FIND_CONTOURS":
            contours = out.product
    image = outputs[-1].image if outputs else None
    for block in blocks[len(outputs):]:
        params, problems = spec_for(block.op).normalize_params(block.params)
        if problems:  # unreachable after validate; defensive
            raise ExecutionPreconditionError(f"{block.op}: {problems[0]}")
        started = time.perf_counter()
        if spec_for(block.op).is_source:
            result = StageOutput(block.op, source)
        else:
            try:
                result = _run_stage(block, params, image, contours)
            except ImageLabError as exc:
                elapsed = (time.perf_counter() - started) * 1000.0
                outputs.append(StageOutput(block.op, error=str(exc), elapsed_ms=elapsed))
                break
        result = replace(result, elapsed_ms=(time.perf_counter() - started) * 1000.0)
        if result.op == "FIND_CONTOURS":
            contours = result.product
        outputs.append(result)
        image = result.image
    return PipelineState(state.pipeline, tuple(outputs))


def first_stale_stage(previous: PipelineState, pipeline: Pipeline) -> int:
    """Longest prefix of ``pipeline`` whose outputs can be reused."""
    reusable = 0
    for i, block in enumerate(pipeline.blocks):
        if i >= len(previous.outputs):
            break
        prev_block = previous.pipeline.blocks[i] if i < len(previous.pipeline.blocks) else None
        if prev_block is None or prev_block.op != block.op or prev_block.params != block.params:
            break
        if previous.outputs[i].error is not None:
            break
        reusable = i + 1
    return reusable


def carry_outputs(previous: PipelineState, pipeline: Pipeline) -> PipelineState:
    """New state for ``pipeline`` reusing the previous state's fresh prefix."""
    keep = first_stale_stage(previous, pipeline)
    return PipelineState(pipeline, tuple(previous.outputs[:keep]))


# --- template documents -----------------------------------------------------


def pipeline_to_doc(pipeline: Pipeline) -> dict:
    return {
        "version": pipeline.version,
        "blocks": [
            {"id": b.id, "op": b.op, "params": dict(b.params)} for b in pipeline.blocks
        ],
    }


def pipeline_from_doc(doc: dict) -> Pipeline:
    """Parse a pipeline document; unknown top-level keys are ignored.

    Structural problems raise TemplateError; an unknown operator id raises
    UnknownOperatorError. Parameter values are kept verbatim here - rule
    validation is the caller's next step.
    """
    if not isinstance(doc, dict):
        raise TemplateError("pipeline document must be an object")
    version = doc.get("version")
    if version != SCHEMA_VERSION:
        raise TemplateError(f"unsupported schema version {version!r} (expected {SCHEMA_VERSION})")
    raw_blocks = doc.get("blocks")
    if not isinstance(raw_blocks, list):
        raise TemplateError("pipeline document needs a 'blocks' list")
    blocks = []
    seen_ids = set()
    for i, raw in enumerate(raw_blocks):
        if not isinstance(raw, dict) or not isinstance(raw.get("op"), str):
            raise TemplateError(f"block {i} must be an object with an 'op' string")
        spec_for(raw["op"])  # raises UnknownOperatorError
        params = raw.get("params", {})
        if not isinstance(params, dict):
            raise TemplateError(f"block {i}: 'params' must be an object")
        block_id = raw.get("id", f"b{i}")
        if not isinstance(block_id, str) or not block_id:
            raise TemplateError(f"block {i}: 'id' must be a nonempty string")
        if block_id in seen_ids:
            raise TemplateError(f"duplicate block id {block_id!r}")
        seen_ids.add(block_id)
        blocks.append(Block(block_id, raw["op"], dict(params)))
    return Pipeline(tuple(blocks))


def save_template(pipeline: Pipeline) -> dict:
    """Persistable document for a valid pipeline."""
    violations = validate(list(pipeline.blocks))
    if violations:
        raise ExecutionPreconditionError(
            "refusing to save an invalid pipeline: " + violations[0].message
        )
    return pipeline_to_doc(pipeline)


def load_template(doc: dict) -> tuple[Pipeline, list[RuleViolation]]:
    """Parse and re-validate a template; returns (pipeline, violations)."""
    pipeline = pipeline_from_doc(doc)
    return pipeline, validate(list(pipeline.blocks))


# --- data-product documents ---------------------------------------------


def histogram_document(hist: ops.Histogram) -> dict:
    return {
        "kind": "HISTOGRAM",
        "channels": hist.channels,
        "total": hist.total,
        "bins": [[int(v) for v in channel] for channel in hist.bins],
    }


def contours_document(contour_set: ops.ContourSet) -> dict:
    return {
        "kind": "CONTOURS",
        "width": contour_set.width,
        "height": contour_set.height,
        "contours": [[[int(x), int(y)] for x, y in c.points] for c in contour_set.contours],
    }


def stage_kind(output: StageOutput) -> str:
    """Preview payload kind for a computed stage."""
    if output.error is not None:
        return "ERROR"
    if isinstance(output.product, ops.Histogram):
        return "HISTOGRAM"
    if isinstance(output.product, ops.ContourSet):
        return "CONTOURS"
    return "IMAGE"
