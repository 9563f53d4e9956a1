"""Declarative block catalog: operator specs, parameter schemas, blocks.

The catalog is data consumed by the rule engine, the executor, the HTTP
service and the CLI alike; nothing else hardcodes operator knowledge.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import UnknownOperatorError

# abstract input requirements
NONE = "NONE"
ANY_IMAGE = "ANY_IMAGE"
GRAY = "GRAY"
BINARY = "BINARY"

# abstract output formats
COLOR = "COLOR"
PASS_THROUGH = "PASS_THROUGH"
DATA_PRODUCT = "DATA_PRODUCT"

CATEGORIES = (
    "I/O", "geometric", "conversion", "drawing", "blur", "filter",
    "threshold", "derivative", "edge", "morphology", "segmentation",
    "contour", "histogram",
)

_NAME_RE = re.compile(r"^[A-Za-z0-9._-]{1,64}$")


@dataclass(frozen=True)
class ParamSpec:
    name: str
    type: str  # int | real | string | enum | coords | color
    default: object
    minimum: float | None = None
    maximum: float | None = None
    exclusive_min: bool = False
    odd: bool = False
    choices: tuple = ()
    description: str = ""

    def problems(self, value) -> list[str]:
        """Human-readable reasons the value is invalid (empty if fine)."""
        p = []
        if self.type == "int":
            if isinstance(value, bool) or not isinstance(value, int):
                return [f"{self.name} must be an integer"]
            if self.odd and value % 2 == 0:
                p.append(f"{self.name} must be odd, got {value}")
        elif self.type == "real":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                return [f"{self.name} must be a number"]
        elif self.type == "string":
            if not isinstance(value, str):
                return [f"{self.name} must be a string"]
        elif self.type == "enum":
            if value not in self.choices:
                return [f"{self.name} must be one of {list(self.choices)}, got {value!r}"]
            return []
        elif self.type == "coords":
            if not isinstance(value, (list, tuple)) or not all(
                isinstance(v, int) and not isinstance(v, bool) for v in value
            ):
                return [f"{self.name} must be a list of integers"]
            return []
        elif self.type == "color":
            ok = (
                isinstance(value, (list, tuple))
                and len(value) == 3
                and all(isinstance(v, int) and not isinstance(v, bool) and 0 <= v <= 255 for v in value)
            )
            return [] if ok else [f"{self.name} must be [r, g, b] with samples in 0..255"]
        if self.type in ("int", "real"):
            if self.minimum is not None:
                if self.exclusive_min and value <= self.minimum:
                    p.append(f"{self.name} must be > {self.minimum}, got {value}")
                elif not self.exclusive_min and value < self.minimum:
                    p.append(f"{self.name} must be >= {self.minimum}, got {value}")
            if self.maximum is not None and value > self.maximum:
                p.append(f"{self.name} must be <= {self.maximum}, got {value}")
        return p


@dataclass(frozen=True)
class BlockSpec:
    op: str
    display_name: str
    category: str
    params: tuple = ()
    input_format: str = ANY_IMAGE
    output_format: str = PASS_THROUGH
    is_source: bool = False
    requires_contours: bool = False
    description: str = ""
    example: str = ""

    def param(self, name: str) -> ParamSpec | None:
        for p in self.params:
            if p.name == name:
                return p
        return None

    def normalize_params(self, values: dict) -> tuple[dict, list[str]]:
        """Fill defaults, validate ranges; returns (params, problems)."""
        problems = []
        out = {}
        values = dict(values or {})
        for spec in self.params:
            if spec.name in values:
                value = values.pop(spec.name)
                if isinstance(value, float) and spec.type == "int" and value.is_integer():
                    value = int(value)  # JSON round-trips may widen ints
                problems.extend(spec.problems(value))
                out[spec.name] = value
            else:
                out[spec.name] = spec.default
        for unknown in sorted(values):
            problems.append(f"unknown parameter {unknown!r}")
        problems.extend(self._cross_checks(out))
        return out, problems

    def _cross_checks(self, params: dict) -> list[str]:
        p = []
        if self.op == "SOBEL" and params.get("dx", 0) + params.get("dy", 0) < 1:
            p.append("dx + dy must be >= 1")
        if self.op == "CANNY":
            low, high = params.get("low"), params.get("high")
            if isinstance(low, (int, float)) and isinstance(high, (int, float)) and low > high:
                p.append(f"low must be <= high, got low={low} high={high}")
        if self.op == "DRAW":
            shape = params.get("shape")
            geometry = params.get("geometry")
            arity = {"LINE": 4, "RECT": 4, "CIRCLE": 3}.get(shape)
            if arity and isinstance(geometry, (list, tuple)) and len(geometry) != arity:
                p.append(f"{shape} geometry needs {arity} integers, got {len(geometry)}")
            if shape == "CIRCLE" and isinstance(geometry, (list, tuple)) and len(geometry) == 3:
                if geometry[2] < 0:
                    p.append(f"radius must be >= 0, got {geometry[2]}")
        if self.op == "WRITE_IMAGE" and isinstance(params.get("filename"), str):
            if not _NAME_RE.match(params["filename"]):
                p.append("filename must match [A-Za-z0-9._-]{1,64}")
        if self.op == "FILTER_2D" and isinstance(params.get("kernel"), str):
            try:
                parse_kernel_string(params["kernel"])
            except ValueError as exc:
                p.append(str(exc))
        return p


def parse_kernel_string(text: str) -> list[list[float]]:
    """Parse 'a,b,c;d,e,f;g,h,i' into a square odd-sized weight matrix."""
    rows = [r for r in text.split(";") if r.strip()]
    try:
        matrix = [[float(v) for v in row.split(",")] for row in rows]
    except ValueError:
        raise ValueError(f"kernel entries must be numbers: {text!r}") from None
    k = len(matrix)
    if k < 1 or k % 2 == 0 or any(len(row) != k for row in matrix):
        raise ValueError(f"kernel must be square with odd size, got {text!r}")
    return matrix


@dataclass(frozen=True)
class Block:
    """One placed pipeline step: instance id + operator id + parameters."""

    id: str
    op: str
    params: dict = field(default_factory=dict)


def _odd_kernel(name="k", default=3, maximum=31, description="window size (odd)"):
    return ParamSpec(name, "int", default, minimum=1, maximum=maximum, odd=True,
                     description=description)


_SPECS = [
    BlockSpec(
        "READ_IMAGE", "Read Image", "I/O",
        input_format=NONE, output_format=COLOR, is_source=True,
        description="Loads the pipeline's source image; must be the first block.",
        example="READ_IMAGE",
    ),
    BlockSpec(
        "WRITE_IMAGE", "Write Image", "I/O",
        params=(ParamSpec("filename", "string", "output.png",
                          description="artifact name, letters/digits/._- only"),),
        description="Records the current image as a named PNG artifact and passes it on.",
        example="WRITE_IMAGE filename=result.png",
    ),
    BlockSpec(
        "RESIZE", "Scale Image", "geometric",
        params=(
            ParamSpec("fx", "real", 0.5, minimum=0.0, exclusive_min=True,
                      description="horizontal scale factor"),
            ParamSpec("fy", "real", 0.5, minimum=0.0, exclusive_min=True,
                      description="vertical scale factor"),
            ParamSpec("interp", "enum", "BILINEAR", choices=("NEAREST", "BILINEAR"),
                      description="sampling mode"),
        ),
        description="Scales the image by independent x/y factors.",
        example="RESIZE fx=0.5 fy=0.5 interp=BILINEAR",
    ),
    BlockSpec(
        "ROTATE", "Rotate", "geometric",
        params=(ParamSpec("angle", "enum", 90, choices=(90, 180, 270),
                          description="clockwise right-angle rotation"),),
        description="Rotates by a right angle without resampling.",
        example="ROTATE angle=90",
    ),
    BlockSpec(
        "FLIP", "Flip", "geometric",
        params=(ParamSpec("axis", "enum", "H", choices=("H", "V"),
                          description="H mirrors left-right, V top-bottom"),),
        description="Mirrors the image.",
        example="FLIP axis=H",
    ),
    BlockSpec(
        "TO_GRAYSCALE", "To Grayscale", "conversion",
        output_format=GRAY,
        description="Converts color to grayscale (Rec. 601 luma weights).",
        example="TO_GRAYSCALE",
    ),
    BlockSpec(
        "DRAW", "Draw Shape", "drawing",
        params=(
            ParamSpec("shape", "enum", "LINE", choices=("LINE", "RECT", "CIRCLE")),
            ParamSpec("geometry", "coords", [0, 0, 10, 10],
                      description="LINE/RECT: [x0,y0,x1,y1]; CIRCLE: [cx,cy,r]"),
            ParamSpec("color", "color", [255, 0, 0]),
            ParamSpec("thickness", "int", 1, minimum=1, maximum=64),
        ),
        description="Draws a line, rectangle outline or circle onto the image.",
        example="DRAW shape=RECT geometry=[2,2,12,9] color=[255,0,0]",
    ),
    BlockSpec(
        "BOX_BLUR", "Box Blur", "blur",
        params=(_odd_kernel(),),
        description="Uniform k x k mean filter.",
        example="BOX_BLUR k=3",
    ),
    BlockSpec(
        "GAUSSIAN_BLUR", "Gaussian Blur", "blur",
        params=(
            _odd_kernel(default=5),
            ParamSpec("sigma", "real", 0.0, minimum=0.0,
                      description="standard deviation; 0 picks one from k"),
        ),
        description="Separable Gaussian smoothing.",
        example="GAUSSIAN_BLUR k=5 sigma=1.2",
    ),
    BlockSpec(
        "MEDIAN_BLUR", "Median Blur", "blur",
        params=(_odd_kernel(),),
        description="k x k window median; removes salt-and-pepper noise.",
        example="MEDIAN_BLUR k=3",
    ),
    BlockSpec(
        "FILTER_2D", "Custom Filter", "filter",
        params=(
            ParamSpec("kernel", "string", "0,0,0;0,1,0;0,0,0",
                      description="rows separated by ';', weights by ','"),
            ParamSpec("normalize", "enum", "false", choices=("false", "true"),
                      description="divide by the weight sum when nonzero"),
        ),
        description="Correlates the image with a custom square kernel.",
        example="FILTER_2D kernel=0,-1,0;-1,5,-1;0,-1,0",
    ),
    BlockSpec(
        "THRESHOLD", "Binary Threshold", "threshold",
        params=(
            ParamSpec("t", "int", 128, minimum=0, maximum=255),
            ParamSpec("maxval", "int", 255, minimum=0, maximum=255),
        ),
        input_format=GRAY, output_format=BINARY,
        description="maxval where sample > t, else 0.",
        example="THRESHOLD t=128 maxval=255",
    ),
    BlockSpec(
        "OTSU", "Otsu Threshold", "threshold",
        input_format=GRAY, output_format=BINARY,
        description="Automatic threshold maximizing between-class variance.",
        example="OTSU",
    ),
    BlockSpec(
        "SOBEL", "Sobel Derivative", "derivative",
        params=(
            ParamSpec("dx", "int", 1, minimum=0, maximum=1),
            ParamSpec("dy", "int", 1, minimum=0, maximum=1),
        ),
        input_format=GRAY, output_format=GRAY,
        description="3x3 Sobel; renders |gx|, |gy| or the magnitude (dx and dy).",
        example="SOBEL dx=1 dy=0",
    ),
    BlockSpec(
        "LAPLACIAN", "Laplacian", "derivative",
        input_format=GRAY, output_format=GRAY,
        description="4-neighbor Laplacian magnitude.",
        example="LAPLACIAN",
    ),
    BlockSpec(
        "CANNY", "Canny Edges", "edge",
        params=(
            ParamSpec("low", "real", 50.0, minimum=0.0),
            ParamSpec("high", "real", 100.0, minimum=0.0),
        ),
        input_format=GRAY, output_format=BINARY,
        description="Canny edge map with hysteresis between low and high.",
        example="CANNY low=50 high=100",
    ),
    BlockSpec(
        "ERODE", "Erode", "morphology",
        params=(_odd_kernel(),),
        description="Per-channel minimum over a k x k square element.",
        example="ERODE k=3",
    ),
    BlockSpec(
        "DILATE", "Dilate", "morphology",
        params=(_odd_kernel(),),
        description="Per-channel maximum over a k x k square element.",
        example="DILATE k=3",
    ),
    BlockSpec(
        "DISTANCE_TRANSFORM", "Distance Transform", "segmentation",
        input_format=BINARY, output_format=GRAY,
        description="L1 distance to the nearest background pixel, as brightness.",
        example="DISTANCE_TRANSFORM",
    ),
    BlockSpec(
        "FIND_CONTOURS", "Find Contours", "contour",
        input_format=BINARY, output_format=DATA_PRODUCT,
        description="Traces one outer boundary per connected component.",
        example="FIND_CONTOURS",
    ),
    BlockSpec(
        "DRAW_CONTOURS", "Draw Contours", "contour",
        params=(ParamSpec("color", "color", [255, 0, 0]),),
        requires_contours=True,
        description="Paints the most recently found contours onto the image.",
        example="DRAW_CONTOURS color=[255,0,0]",
    ),
    BlockSpec(
        "HISTOGRAM", "Histogram", "histogram",
        output_format=DATA_PRODUCT,
        description="Counts samples per intensity; the image passes through.",
        example="HISTOGRAM",
    ),
    BlockSpec(
        "EQUALIZE", "Equalize Histogram", "histogram",
        input_format=GRAY, output_format=GRAY,
        description="Spreads intensities over the full range via the cdf.",
        example="EQUALIZE",
    ),
]


def catalog() -> list[BlockSpec]:
    """All block specs, ordered by category (palette order) then op id."""
    order = {name: i for i, name in enumerate(CATEGORIES)}
    return sorted(_SPECS, key=lambda s: (order[s.category], s.op))


_BY_OP = {spec.op: spec for spec in _SPECS}


def spec_for(op: str) -> BlockSpec:
    try:
        return _BY_OP[op]
    except KeyError:
        raise UnknownOperatorError(f"unknown operator id {op!r}") from None


def catalog_document() -> dict:
    """JSON-safe catalog projection served to clients."""
    specs = []
    for spec in catalog():
        specs.append({
            "op": spec.op,
            "display_name": spec.display_name,
            "category": spec.category,
            "is_source": spec.is_source,
            "input_format": spec.input_format,
            "output_format": spec.output_format,
            "requires_contours": spec.requires_contours,
            "description": spec.description,
            "example": spec.example,
            "params": [
                {
                    "name": p.name,
                    "type": p.type,
                    "default": p.default,
                    "minimum": p.minimum,
                    "maximum": p.maximum,
                    "exclusive_min": p.exclusive_min,
                    "odd": p.odd,
                    "choices": list(p.choices),
                    "description": p.description,
                }
                for p in spec.params
            ],
        })
    return {"version": 1, "specs": specs}
