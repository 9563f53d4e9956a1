"""Image buffers: 8-bit raster images and float intermediate planes.

Images are immutable values: every operation that "modifies" an image
returns a new buffer, so instances are safe to share across threads and
across history snapshots.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArityMismatchError, BoundsError, InvalidDimensionError

GRAY8 = "GRAY8"
RGB8 = "RGB8"

_CHANNELS = {GRAY8: 1, RGB8: 3}


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Image:
    """Row-major interleaved 8-bit image, shape (height, width, channels)."""

    pixels: np.ndarray = field(repr=False)
    format: str = GRAY8

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.uint8)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3:
            raise InvalidDimensionError(f"pixel array must be 2-D or 3-D, got ndim={arr.ndim}")
        if self.format not in _CHANNELS:
            raise InvalidDimensionError(f"unknown format {self.format!r}")
        if arr.shape[2] != _CHANNELS[self.format]:
            raise ArityMismatchError(
                f"{self.format} needs {_CHANNELS[self.format]} channels, got {arr.shape[2]}"
            )
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidDimensionError(f"image dimensions must be >= 1, got {arr.shape[1]}x{arr.shape[0]}")
        object.__setattr__(self, "pixels", _freeze(np.ascontiguousarray(arr)))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    def tobytes(self) -> bytes:
        return self.pixels.tobytes()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Image):
            return NotImplemented
        return (
            self.format == other.format
            and self.pixels.shape == other.pixels.shape
            and bool(np.array_equal(self.pixels, other.pixels))
        )

    def __repr__(self) -> str:
        return f"Image({self.width}x{self.height} {self.format})"


@dataclass(frozen=True)
class FloatPlane:
    """Single-channel float32 plane for signed operator intermediates."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float32)
        if arr.ndim != 2:
            raise InvalidDimensionError(f"plane must be 2-D, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidDimensionError("plane dimensions must be >= 1")
        object.__setattr__(self, "values", _freeze(np.ascontiguousarray(arr)))

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


def new_image(width: int, height: int, format: str = GRAY8, fill: int = 0) -> Image:
    """Create a constant image of the given size and format."""
    if width < 1 or height < 1:
        raise InvalidDimensionError(f"image dimensions must be >= 1, got {width}x{height}")
    if not 0 <= fill <= 255:
        raise ArityMismatchError(f"fill value {fill} outside [0, 255]")
    arr = np.full((height, width, _CHANNELS[format]), fill, dtype=np.uint8)
    return Image(arr, format)


def from_bytes(width: int, height: int, format: str, data: bytes) -> Image:
    """Build an image from raw row-major interleaved samples."""
    if width < 1 or height < 1:
        raise InvalidDimensionError(f"image dimensions must be >= 1, got {width}x{height}")
    channels = _CHANNELS[format]
    expected = width * height * channels
    if len(data) != expected:
        raise InvalidDimensionError(f"expected {expected} samples, got {len(data)}")
    arr = np.frombuffer(bytes(data), dtype=np.uint8).reshape(height, width, channels)
    return Image(arr, format)


def _check_bounds(img: Image, x: int, y: int) -> None:
    if not (0 <= x < img.width and 0 <= y < img.height):
        raise BoundsError(f"({x}, {y}) outside {img.width}x{img.height} image")


def get_pixel(img: Image, x: int, y: int) -> tuple[int, ...]:
    """Return the sample tuple at (x, y); 1 value for GRAY8, 3 for RGB8."""
    _check_bounds(img, x, y)
    return tuple(int(v) for v in img.pixels[y, x])


def set_pixel(img: Image, x: int, y: int, value) -> Image:
    """Return a copy of ``img`` with the pixel at (x, y) replaced."""
    _check_bounds(img, x, y)
    value = tuple(value) if not isinstance(value, (int, np.integer)) else (int(value),)
    if len(value) != img.channels:
        raise ArityMismatchError(f"expected {img.channels} samples, got {len(value)}")
    for v in value:
        if not 0 <= int(v) <= 255:
            raise ArityMismatchError(f"sample value {v} outside [0, 255]")
    arr = img.pixels.copy()
    arr[y, x] = value
    return Image(arr, img.format)
