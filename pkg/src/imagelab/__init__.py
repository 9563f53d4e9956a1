"""imagelab: a block-based image processing pipeline workbench.

Pipelines are linear sequences of operator blocks, validated by a rule
engine before they can run, executed stage by stage with cached outputs,
tracked through an undo/redo history, and persisted as templates. The
package exposes the same engine through a CLI (`imagelab`) and an HTTP
service (`imagelab-service`).
"""

from .blocks import Block, BlockSpec, ParamSpec, catalog, catalog_document, spec_for
from .codecs import decode_png, decode_ppm, encode_png, encode_ppm
from .engine import (
    Pipeline,
    PipelineState,
    StageOutput,
    execute,
    load_template,
    pipeline_from_doc,
    pipeline_to_doc,
    save_template,
)
from .history import HistoryStack, append_block
from .raster import GRAY8, RGB8, FloatPlane, Image, from_bytes, get_pixel, new_image, set_pixel
from .rules import FormatState, RuleViolation, tail_state, validate, validate_append

__version__ = "0.1.0"

__all__ = [
    "Block", "BlockSpec", "ParamSpec", "catalog", "catalog_document", "spec_for",
    "decode_png", "decode_ppm", "encode_png", "encode_ppm",
    "Pipeline", "PipelineState", "StageOutput", "execute",
    "load_template", "pipeline_from_doc", "pipeline_to_doc", "save_template",
    "HistoryStack", "append_block",
    "GRAY8", "RGB8", "FloatPlane", "Image", "from_bytes", "get_pixel", "new_image", "set_pixel",
    "FormatState", "RuleViolation", "tail_state", "validate", "validate_append",
    "__version__",
]
