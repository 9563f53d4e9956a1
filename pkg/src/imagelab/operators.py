"""Image operators: pure functions from image(s) + parameters to new values.

Conventions shared by every neighborhood operator:
  - border policy is REPLICATE (coordinates clamp to the nearest pixel),
  - convolution uses correlation orientation (kernel is not flipped),
  - float -> 8-bit conversion rounds half away from zero, then clamps.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ArityMismatchError,
    FormatError,
    InvalidKernelError,
    NoBackgroundError,
    ParameterError,
)
from .raster import GRAY8, RGB8, FloatPlane, Image

ERODE = "ERODE"
DILATE = "DILATE"
NEAREST = "NEAREST"
BILINEAR = "BILINEAR"

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
LAPLACIAN_KERNEL = np.array([[0, 1, 0], [1, -4, 1], [0, 1, 0]], dtype=np.float64)


# ---------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True)
class Kernel:
    """Square odd-sized convolution kernel, anchored at its center."""

    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.weights, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidKernelError(f"kernel must be square, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[0] % 2 == 0:
            raise InvalidKernelError(f"kernel size must be odd and >= 1, got {arr.shape[0]}")
        if not np.all(np.isfinite(arr)):
            raise InvalidKernelError("kernel weights must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "weights", arr)

    @property
    def size(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class Histogram:
    """Per-channel 256-bin sample counts."""

    bins: np.ndarray = field(repr=False)  # shape (channels, 256)
    total: int = 0

    @property
    def channels(self) -> int:
        return self.bins.shape[0]


@dataclass(frozen=True)
class Contour:
    """Closed boundary of one connected component, as (x, y) points."""

    points: tuple


@dataclass(frozen=True)
class ContourSet:
    contours: tuple
    width: int
    height: int

    def __len__(self) -> int:
        return len(self.contours)


@dataclass(frozen=True)
class GradientField:
    gx: FloatPlane
    gy: FloatPlane
    magnitude: FloatPlane


# ---------------------------------------------------------------------------
# Shared helpers


def _round_half_away(values: np.ndarray) -> np.ndarray:
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def _to_u8(values: np.ndarray) -> np.ndarray:
    return np.clip(_round_half_away(values), 0, 255).astype(np.uint8)


def _require_gray(img: Image, op: str) -> None:
    if img.format != GRAY8:
        raise FormatError(f"{op} requires a GRAY8 image, got {img.format}")


def _check_odd(k: int) -> None:
    if not isinstance(k, (int, np.integer)) or k < 1 or k % 2 == 0:
        raise InvalidKernelError(f"kernel size must be an odd integer >= 1, got {k}")


def _pad_replicate(arr: np.ndarray, pad: int) -> np.ndarray:
    if pad == 0:
        return arr
    widths = ((pad, pad), (pad, pad)) + ((0, 0),) * (arr.ndim - 2)
    return np.pad(arr, widths, mode="edge")


def _check_color(img: Image, color) -> tuple:
    color = tuple(int(v) for v in (color if hasattr(color, "__len__") else (color,)))
    if len(color) != img.channels:
        raise ArityMismatchError(f"color needs {img.channels} samples, got {len(color)}")
    for v in color:
        if not 0 <= v <= 255:
            raise ParameterError(f"color sample {v} outside [0, 255]")
    return color


# ---------------------------------------------------------------------------
# Conversions


def to_grayscale(img: Image) -> Image:
    """Rec. 601 luma; GRAY8 input is returned unchanged."""
    if img.format == GRAY8:
        return img
    rgb = img.pixels.astype(np.float64)
    luma = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
    return Image(_to_u8(luma), GRAY8)


# ---------------------------------------------------------------------------
# Linear filtering


def convolve(img: Image, kernel: Kernel, normalize: bool = False) -> Image:
    """Correlate each channel with the kernel under the replicate border."""
    if not isinstance(kernel, Kernel):
        kernel = Kernel(kernel)
    k = kernel.size
    pad = k // 2
    w = kernel.weights
    padded = _pad_replicate(img.pixels.astype(np.float64), pad)
    h, wd = img.height, img.width
    acc = np.zeros((h, wd, img.channels), dtype=np.float64)
    for i in range(k):
        for j in range(k):
            acc = acc + w[i, j] * padded[i : i + h, j : j + wd]
    total = float(w.sum())
    if normalize and total != 0.0:
        acc = acc / total
    return Image(_to_u8(acc), img.format)


def box_blur(img: Image, k: int) -> Image:
    """Normalized uniform k x k mean filter."""
    _check_odd(k)
    return convolve(img, Kernel(np.ones((k, k))), normalize=True)


def gaussian_kernel_1d(k: int, sigma: float | None = None) -> np.ndarray:
    """Normalized 1-D Gaussian weights for an odd window of size k."""
    _check_odd(k)
    if sigma is None:
        sigma = 0.3 * ((k - 1) / 2 - 1) + 0.8
    if sigma <= 0:
        raise ParameterError(f"sigma must be > 0, got {sigma}")
    r = (k - 1) // 2
    weights = np.array([math.exp(-(i * i) / (2.0 * sigma * sigma)) for i in range(-r, r + 1)])
    return weights / weights.sum()


def gaussian_blur(img: Image, k: int, sigma: float | None = None) -> Image:
    """Separable Gaussian smoothing: horizontal then vertical 1-D pass."""
    weights = gaussian_kernel_1d(k, sigma)
    pad = (k - 1) // 2
    h, w = img.height, img.width

    horiz = _pad_replicate(img.pixels.astype(np.float64), pad)[pad : pad + h]
    acc = np.zeros((h, w, img.channels), dtype=np.float64)
    for j in range(k):
        acc = acc + weights[j] * horiz[:, j : j + w]

    vert = _pad_replicate(acc, pad)[:, pad : pad + w]
    out = np.zeros_like(acc)
    for i in range(k):
        out = out + weights[i] * vert[i : i + h]
    return Image(_to_u8(out), img.format)


def median_blur(img: Image, k: int) -> Image:
    """Per-channel k x k window median (k*k is odd, so the median is unique)."""
    _check_odd(k)
    pad = k // 2
    padded = _pad_replicate(img.pixels, pad)
    h, w = img.height, img.width
    windows = np.stack(
        [padded[i : i + h, j : j + w] for i in range(k) for j in range(k)], axis=0
    )
    return Image(np.sort(windows, axis=0)[k * k // 2], img.format)


# ---------------------------------------------------------------------------
# Thresholding


def _check_sample(value: int, name: str) -> int:
    if not 0 <= int(value) <= 255:
        raise ParameterError(f"{name} must be in [0, 255], got {value}")
    return int(value)


def threshold_binary(img: Image, t: int, maxval: int = 255) -> Image:
    """maxval where sample > t, else 0."""
    _require_gray(img, "threshold")
    t = _check_sample(t, "threshold")
    maxval = _check_sample(maxval, "maxval")
    out = np.where(img.pixels > t, np.uint8(maxval), np.uint8(0))
    return Image(out, GRAY8)


def otsu_threshold(img: Image) -> tuple[int, Image]:
    """Threshold maximizing between-class variance, smallest t on ties.

    The argmax comparison is done in exact integer arithmetic so the result
    is deterministic and immune to floating-point near-ties.
    """
    _require_gray(img, "otsu")
    hist = np.bincount(img.pixels.reshape(-1), minlength=256)
    counts = [int(c) for c in hist]
    total = sum(counts)
    total_sum = sum(v * c for v, c in enumerate(counts))

    best_t = 0
    best_num, best_den = 0, 1  # sigma_b(t) ~ num/den, compared as fractions
    n0 = s0 = 0
    for t in range(0, 255):
        n0 += counts[t]
        s0 += t * counts[t]
        n1 = total - n0
        s1 = total_sum - s0
        if n0 == 0 or n1 == 0:
            num, den = 0, 1
        else:
            diff = s0 * n1 - s1 * n0
            num, den = diff * diff, n0 * n1
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t, threshold_binary(img, best_t, 255)


# ---------------------------------------------------------------------------
# Derivatives and edges


def _correlate_float(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    k = kernel.shape[0]
    pad = k // 2
    padded = _pad_replicate(plane.astype(np.float64), pad)
    h, w = plane.shape
    acc = np.zeros((h, w), dtype=np.float64)
    for i in range(k):
        for j in range(k):
            acc = acc + kernel[i, j] * padded[i : i + h, j : j + w]
    return acc


def sobel(img: Image, dx: int = 1, dy: int = 1) -> GradientField:
    """3x3 Sobel derivatives; disabled axes yield a zero plane."""
    _require_gray(img, "sobel")
    if dx not in (0, 1) or dy not in (0, 1) or dx + dy < 1:
        raise ParameterError(f"dx, dy must be 0 or 1 with dx + dy >= 1, got {dx}, {dy}")
    plane = img.pixels[:, :, 0]
    zeros = np.zeros(plane.shape, dtype=np.float64)
    gx = _correlate_float(plane, SOBEL_X) if dx else zeros
    gy = _correlate_float(plane, SOBEL_X.T) if dy else zeros
    magnitude = np.hypot(gx, gy)
    return GradientField(FloatPlane(gx), FloatPlane(gy), FloatPlane(magnitude))


def laplacian(img: Image) -> Image:
    """4-neighbor Laplacian; display image is |value| rounded and clamped."""
    _require_gray(img, "laplacian")
    acc = _correlate_float(img.pixels[:, :, 0], LAPLACIAN_KERNEL)
    return Image(_to_u8(np.abs(acc)), GRAY8)


def plane_to_image(plane: FloatPlane) -> Image:
    """Render a float plane as GRAY8 via |value|, rounded and clamped."""
    return Image(_to_u8(np.abs(plane.values.astype(np.float64))), GRAY8)


def canny(img: Image, low: float, high: float) -> Image:
    """Canny edge map: blur, Sobel, direction-quantized non-maximum
    suppression, double threshold, and 8-connected hysteresis.

    On plateaus of equal magnitude the pixel first along the gradient
    direction survives (>= toward the positive direction, > toward the
    negative), so a symmetric step edge keeps exactly one column.
    """
    _require_gray(img, "canny")
    if low < 0 or low > high:
        raise ParameterError(f"need 0 <= low <= high, got low={low} high={high}")

    blurred = gaussian_blur(img, 5)
    grad = sobel(blurred, 1, 1)
    gx = grad.gx.values.astype(np.float64)
    gy = grad.gy.values.astype(np.float64)
    mag = grad.magnitude.values.astype(np.float64)
    h, w = mag.shape

    angle = np.degrees(np.arctan2(gy, gx)) % 180.0
    bins = np.zeros((h, w), dtype=np.int8)
    bins[(angle >= 22.5) & (angle < 67.5)] = 1
    bins[(angle >= 67.5) & (angle < 112.5)] = 2
    bins[(angle >= 112.5) & (angle < 157.5)] = 3

    offsets = {0: (1, 0), 1: (1, 1), 2: (0, 1), 3: (-1, 1)}
    dxs = np.zeros((h, w), dtype=np.int64)
    dys = np.zeros((h, w), dtype=np.int64)
    for b, (ox, oy) in offsets.items():
        sel = bins == b
        dxs[sel] = ox
        dys[sel] = oy

    ys, xs = np.indices((h, w))
    fwd = mag[np.clip(ys + dys, 0, h - 1), np.clip(xs + dxs, 0, w - 1)]
    bwd = mag[np.clip(ys - dys, 0, h - 1), np.clip(xs - dxs, 0, w - 1)]
    keep = (mag >= fwd) & (mag > bwd)

    suppressed = np.where(keep, mag, 0.0)
    strong = suppressed >= high
    weak = (suppressed >= low) & ~strong

    edges = strong.copy()
    queue = deque(zip(*np.nonzero(strong)))
    while queue:
        y, x = queue.popleft()
        for ny in range(max(0, y - 1), min(h, y + 2)):
            for nx in range(max(0, x - 1), min(w, x + 2)):
                if weak[ny, nx] and not edges[ny, nx]:
                    edges[ny, nx] = True
                    queue.append((ny, nx))
    return Image(np.where(edges, np.uint8(255), np.uint8(0)), GRAY8)


# ---------------------------------------------------------------------------
# Morphology


def morphology(img: Image, op: str, k: int) -> Image:
    """Grayscale erosion/dilation with a full k x k square element."""
    if op not in (ERODE, DILATE):
        raise ParameterError(f"morphology op must be ERODE or DILATE, got {op!r}")
    _check_odd(k)
    pad = k // 2
    padded = _pad_replicate(img.pixels, pad)
    h, w = img.height, img.width
    windows = np.stack(
        [padded[i : i + h, j : j + w] for i in range(k) for j in range(k)], axis=0
    )
    reduced = windows.min(axis=0) if op == ERODE else windows.max(axis=0)
    return Image(reduced, img.format)


# ---------------------------------------------------------------------------
# Geometry


def _round_dim(value: float) -> int:
    return max(1, int(math.floor(value + 0.5)))


def resize(img: Image, fx: float, fy: float, interp: str = BILINEAR) -> Image:
    """Scale by (fx, fy) with pixel-center sampling."""
    if fx <= 0 or fy <= 0:
        raise ParameterError(f"scale factors must be > 0, got fx={fx} fy={fy}")
    if interp not in (NEAREST, BILINEAR):
        raise ParameterError(f"interp must be NEAREST or BILINEAR, got {interp!r}")
    out_w = _round_dim(img.width * fx)
    out_h = _round_dim(img.height * fy)
    sx = np.clip((np.arange(out_w) + 0.5) / fx - 0.5, 0, img.width - 1)
    sy = np.clip((np.arange(out_h) + 0.5) / fy - 0.5, 0, img.height - 1)
    arr = img.pixels

    if interp == NEAREST:
        ix = np.floor(sx + 0.5).astype(np.int64)
        iy = np.floor(sy + 0.5).astype(np.int64)
        return Image(arr[iy[:, np.newaxis], ix[np.newaxis, :]], img.format)

    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    x1 = np.minimum(x0 + 1, img.width - 1)
    y1 = np.minimum(y0 + 1, img.height - 1)
    wx = (sx - x0)[np.newaxis, :, np.newaxis]
    wy = (sy - y0)[:, np.newaxis, np.newaxis]
    p00 = arr[y0[:, np.newaxis], x0[np.newaxis, :]].astype(np.float64)
    p01 = arr[y0[:, np.newaxis], x1[np.newaxis, :]].astype(np.float64)
    p10 = arr[y1[:, np.newaxis], x0[np.newaxis, :]].astype(np.float64)
    p11 = arr[y1[:, np.newaxis], x1[np.newaxis, :]].astype(np.float64)
    top = (1 - wx) * p00 + wx * p01
    bottom = (1 - wx) * p10 + wx * p11
    return Image(_to_u8((1 - wy) * top + wy * bottom), img.format)


def rotate(img: Image, angle: int) -> Image:
    """Lossless right-angle rotation (clockwise for 90)."""
    arr = img.pixels
    if angle == 90:
        out = arr.transpose(1, 0, 2)[:, ::-1]
    elif angle == 180:
        out = arr[::-1, ::-1]
    elif angle == 270:
        out = arr.transpose(1, 0, 2)[::-1, :]
    else:
        raise ParameterError(f"angle must be 90, 180 or 270, got {angle}")
    return Image(out.copy(), img.format)


def flip(img: Image, axis: str) -> Image:
    """H mirrors left-right, V mirrors top-bottom."""
    if axis == "H":
        out = img.pixels[:, ::-1]
    elif axis == "V":
        out = img.pixels[::-1, :]
    else:
        raise ParameterError(f"axis must be 'H' or 'V', got {axis!r}")
    return Image(out.copy(), img.format)


# ---------------------------------------------------------------------------
# Drawing


def _bresenham(x0: int, y0: int, x1: int, y1: int):
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    step_x = 1 if x0 < x1 else -1
    step_y = 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        yield x0, y0
        if x0 == x1 and y0 == y1:
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += step_x
        if e2 <= dx:
            err += dx
            y0 += step_y


def _midpoint_circle(cx: int, cy: int, r: int):
    x, y = r, 0
    d = 1 - r
    while x >= y:
        yield from (
            (cx + x, cy + y), (cx - x, cy + y), (cx + x, cy - y), (cx - x, cy - y),
            (cx + y, cy + x), (cx - y, cy + x), (cx + y, cy - x), (cx - y, cy - x),
        )
        y += 1
        if d < 0:
            d += 2 * y + 1
        else:
            x -= 1
            d += 2 * (y - x) + 1


def draw_primitive(img: Image, shape: str, geometry, color, thickness: int = 1) -> Image:
    """Draw LINE/RECT/CIRCLE onto a copy; out-of-bounds pixels are clipped."""
    color = _check_color(img, color)
    if thickness < 1:
        raise ParameterError(f"thickness must be >= 1, got {thickness}")
    geometry = [int(v) for v in geometry]

    if shape == "LINE":
        if len(geometry) != 4:
            raise ParameterError("LINE geometry is [x0, y0, x1, y1]")
        stroke = set(_bresenham(*geometry))
    elif shape == "RECT":
        if len(geometry) != 4:
            raise ParameterError("RECT geometry is [x0, y0, x1, y1]")
        x0, y0, x1, y1 = geometry
        xa, xb = sorted((x0, x1))
        ya, yb = sorted((y0, y1))
        stroke = set(_bresenham(xa, ya, xb, ya)) | set(_bresenham(xa, yb, xb, yb))
        stroke |= set(_bresenham(xa, ya, xa, yb)) | set(_bresenham(xb, ya, xb, yb))
    elif shape == "CIRCLE":
        if len(geometry) != 3:
            raise ParameterError("CIRCLE geometry is [cx, cy, r]")
        cx, cy, r = geometry
        if r < 0:
            raise ParameterError(f"radius must be >= 0, got {r}")
        stroke = {(cx, cy)} if r == 0 else set(_midpoint_circle(cx, cy, r))
    else:
        raise ParameterError(f"shape must be LINE, RECT or CIRCLE, got {shape!r}")

    lo = -((thickness - 1) // 2)
    hi = thickness // 2
    arr = img.pixels.copy()
    for x, y in stroke:
        for ox in range(lo, hi + 1):
            for oy in range(lo, hi + 1):
                px, py = x + ox, y + oy
                if 0 <= px < img.width and 0 <= py < img.height:
                    arr[py, px] = color
    return Image(arr, img.format)


# ---------------------------------------------------------------------------
# Segmentation primitives


def distance_transform(img: Image) -> FloatPlane:
    """Exact L1 distance to the nearest zero pixel (two-pass raster scan)."""
    _require_gray(img, "distance transform")
    fg = img.pixels[:, :, 0] != 0
    if fg.all():
        raise NoBackgroundError("image has no background (zero) pixel")
    h, w = fg.shape
    inf = h + w
    dist = np.where(fg, inf, 0).astype(np.int64)
    ix = np.arange(w)

    # serial left/right propagation per row, as a running-minimum identity:
    # min over j<=x of d[j] + (x - j)  ==  x + min.accumulate(d[j] - j)
    for y in range(h):
        if y > 0:
            dist[y] = np.minimum(dist[y], dist[y - 1] + 1)
        dist[y] = ix + np.minimum.accumulate(dist[y] - ix)
    for y in range(h - 1, -1, -1):
        if y < h - 1:
            dist[y] = np.minimum(dist[y], dist[y + 1] + 1)
        rev = dist[y, ::-1]
        dist[y] = (ix + np.minimum.accumulate(rev - ix))[::-1]
    return FloatPlane(dist.astype(np.float32))


# ---------------------------------------------------------------------------
# Contours

# Moore neighborhood in clockwise order starting from west (dx, dy).
_MOORE = ((-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1))


def _trace_boundary(fg: np.ndarray, start: tuple) -> list:
    """Moore-neighbor trace, clockwise, stopping per Jacob's criterion."""
    h, w = fg.shape
    sx, sy = start

    def is_fg(x, y):
        return 0 <= x < w and 0 <= y < h and fg[y, x]

    contour = [start]
    cur = start
    back = (sx - 1, sy)  # start is topmost-leftmost, so west is background
    first_move = None
    seen_states = set()
    while True:
        bi = _MOORE.index((back[0] - cur[0], back[1] - cur[1]))
        nxt = None
        for step in range(1, 9):
            idx = (bi + step) % 8
            cand = (cur[0] + _MOORE[idx][0], cur[1] + _MOORE[idx][1])
            if is_fg(*cand):
                prev_idx = (bi + step - 1) % 8
                prev = (cur[0] + _MOORE[prev_idx][0], cur[1] + _MOORE[prev_idx][1])
                nxt = (cand, back if step == 1 else prev)
                break
        if nxt is None:
            break  # isolated pixel
        if cur == start and first_move is None:
            first_move = nxt[0]
        elif cur == start and nxt[0] == first_move:
            break
        cur, back = nxt
        if (cur, back) in seen_states:
            break
        seen_states.add((cur, back))
        contour.append(cur)
    if len(contour) > 1 and contour[-1] == contour[0]:
        contour.pop()
    return contour


def find_contours(img: Image) -> ContourSet:
    """One clockwise outer boundary per 8-connected foreground component."""
    _require_gray(img, "find contours")
    fg = img.pixels[:, :, 0] != 0
    h, w = fg.shape
    labeled = np.zeros((h, w), dtype=bool)
    contours = []
    for y in range(h):
        for x in np.nonzero(fg[y])[0]:
            if labeled[y, x]:
                continue
            # flood-fill the component so later pixels of it are skipped
            queue = deque([(int(x), y)])
            labeled[y, x] = True
            while queue:
                px, py = queue.popleft()
                for ox, oy in _MOORE:
                    nx, ny = px + ox, py + oy
                    if 0 <= nx < w and 0 <= ny < h and fg[ny, nx] and not labeled[ny, nx]:
                        labeled[ny, nx] = True
                        queue.append((nx, ny))
            contours.append(Contour(tuple(_trace_boundary(fg, (int(x), y)))))
    return ContourSet(tuple(contours), w, h)


def draw_contours(img: Image, contour_set: ContourSet, color) -> Image:
    """Recolor every contour point; out-of-bounds points are clipped."""
    color = _check_color(img, color)
    arr = img.pixels.copy()
    for contour in contour_set.contours:
        for x, y in contour.points:
            if 0 <= x < img.width and 0 <= y < img.height:
                arr[y, x] = color
    return Image(arr, img.format)


# ---------------------------------------------------------------------------
# Histograms


def histogram(img: Image) -> Histogram:
    """Per-channel 256-bin counts."""
    bins = np.stack(
        [np.bincount(img.pixels[:, :, c].reshape(-1), minlength=256) for c in range(img.channels)]
    )
    return Histogram(bins, img.width * img.height)


def equalize_histogram(img: Image) -> Image:
    """Global histogram equalization via the standard cdf remapping."""
    _require_gray(img, "equalize")
    hist = np.bincount(img.pixels.reshape(-1), minlength=256)
    cdf = np.cumsum(hist)
    total = int(cdf[-1])
    cdf_min = int(cdf[hist > 0][0])
    if total == cdf_min:
        mapping = np.zeros(256, dtype=np.uint8)  # constant image
    else:
        mapping = _to_u8((cdf - cdf_min) / (total - cdf_min) * 255.0)
    return Image(mapping[img.pixels], GRAY8)
