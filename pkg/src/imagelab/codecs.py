"""Lossless image codecs: an 8-bit PNG subset and binary PPM.

PNG support is deliberately narrow: bit depth 8, color types 0/2/3/4/6,
optional tRNS, interlace methods 0 and 1 (Adam7). Alpha never survives
decoding; it is composited over white. The encoder always writes
non-interlaced color type 0 or 2 with filter 0 rows, so output bytes are
deterministic for a given image.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from .errors import DecodeError, UnsupportedFormatError
from .raster import GRAY8, RGB8, Image

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

# Adam7 pass layout: (first row, first col, row step, col step)
_ADAM7 = [
    (0, 0, 8, 8),
    (0, 4, 8, 8),
    (4, 0, 8, 4),
    (0, 2, 4, 4),
    (2, 0, 4, 2),
    (0, 1, 2, 2),
    (1, 0, 2, 1),
]


def _chunk(tag: bytes, payload: bytes) -> bytes:
    crc = zlib.crc32(tag + payload) & 0xFFFFFFFF
    return struct.pack(">I", len(payload)) + tag + payload + struct.pack(">I", crc)


def encode_png(img: Image) -> bytes:
    """Encode an image as PNG (color type 0 for GRAY8, 2 for RGB8)."""
    color_type = 0 if img.format == GRAY8 else 2
    ihdr = struct.pack(">IIBBBBB", img.width, img.height, 8, color_type, 0, 0, 0)
    raw = bytearray()
    row_bytes = img.pixels.reshape(img.height, -1)
    for y in range(img.height):
        raw.append(0)  # filter type None
        raw.extend(row_bytes[y].tobytes())
    return (
        PNG_SIGNATURE
        + _chunk(b"IHDR", ihdr)
        + _chunk(b"IDAT", zlib.compress(bytes(raw), 6))
        + _chunk(b"IEND", b"")
    )


def _paeth(a: int, b: int, c: int) -> int:
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    return b if pb <= pc else c


def _unfilter(data: bytes, width: int, height: int, bpp: int, offset: int) -> np.ndarray:
    """Reverse per-row PNG filtering; returns (height, width*bpp) uint8."""
    stride = width * bpp
    if len(data) < height * (stride + 1):
        raise DecodeError("pixel data shorter than expected", offset)
    out = np.zeros((height, stride), dtype=np.uint8)
    prior = np.zeros(stride, dtype=np.uint8)
    pos = 0
    for y in range(height):
        ftype = data[pos]
        raw = np.frombuffer(data, dtype=np.uint8, count=stride, offset=pos + 1)
        pos += stride + 1
        if ftype == 0:
            line = raw.copy()
        elif ftype == 1:  # Sub: per byte-lane prefix sum mod 256
            line = raw.reshape(width, bpp).astype(np.uint32)
            line = (np.cumsum(line, axis=0) & 0xFF).astype(np.uint8).reshape(stride)
        elif ftype == 2:  # Up
            line = raw + prior
        elif ftype == 3:  # Average
            buf = bytearray(stride)
            raw_ints = raw.tolist()
            prior_ints = prior.tolist()
            for i in range(stride):
                left = buf[i - bpp] if i >= bpp else 0
                buf[i] = (raw_ints[i] + ((left + prior_ints[i]) >> 1)) & 0xFF
            line = np.frombuffer(bytes(buf), dtype=np.uint8)
        elif ftype == 4:  # Paeth
            buf = bytearray(stride)
            raw_ints = raw.tolist()
            prior_ints = prior.tolist()
            for i in range(stride):
                left = buf[i - bpp] if i >= bpp else 0
                up_left = prior_ints[i - bpp] if i >= bpp else 0
                buf[i] = (raw_ints[i] + _paeth(left, prior_ints[i], up_left)) & 0xFF
            line = np.frombuffer(bytes(buf), dtype=np.uint8)
        else:
            raise DecodeError(f"unknown filter type {ftype}", offset)
        out[y] = line
        prior = out[y]
    return out


def _round_u8(values: np.ndarray) -> np.ndarray:
    return np.floor(values + 0.5).astype(np.uint8)


def _composite_over_white(samples: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Blend (..., C) uint8 samples over white using (...,) uint8 alpha."""
    a = alpha.astype(np.float64)[..., np.newaxis]
    v = samples.astype(np.float64)
    return _round_u8((a * v + (255.0 - a) * 255.0) / 255.0)


class _ChunkReader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = len(PNG_SIGNATURE)

    def __iter__(self):
        return self

    def __next__(self):
        data, pos = self.data, self.pos
        if pos >= len(data):
            raise DecodeError("stream ended before IEND", pos)
        if pos + 8 > len(data):
            raise DecodeError("truncated chunk header", pos)
        (length,) = struct.unpack_from(">I", data, pos)
        tag = data[pos + 4 : pos + 8]
        if pos + 12 + length > len(data):
            raise DecodeError(f"truncated {tag!r} chunk", pos)
        payload = data[pos + 8 : pos + 8 + length]
        (crc,) = struct.unpack_from(">I", data, pos + 8 + length)
        if zlib.crc32(tag + payload) & 0xFFFFFFFF != crc:
            raise DecodeError(f"CRC mismatch in {tag!r} chunk", pos)
        self.pos = pos + 12 + length
        return tag, payload, pos


def decode_png(data: bytes) -> Image:
    """Decode a PNG byte stream into a GRAY8 or RGB8 image.

    Grayscale sources (color types 0 and 4) become GRAY8; truecolor and
    indexed (2, 3, 6) become RGB8. Any alpha is composited over white.
    """
    if not isinstance(data, (bytes, bytearray, memoryview)):
        raise DecodeError("expected a byte sequence")
    data = bytes(data)
    if len(data) < len(PNG_SIGNATURE) or data[:8] != PNG_SIGNATURE:
        raise DecodeError("missing PNG signature", 0)

    ihdr = None
    palette = None
    trns = None
    idat = bytearray()
    seen_iend = False
    reader = _ChunkReader(data)
    for tag, payload, pos in reader:
        if ihdr is None and tag != b"IHDR":
            raise DecodeError("first chunk must be IHDR", pos)
        if tag == b"IHDR":
            if len(payload) != 13:
                raise DecodeError("IHDR must be 13 bytes", pos)
            ihdr = struct.unpack(">IIBBBBB", payload)
        elif tag == b"PLTE":
            if len(payload) % 3 != 0 or len(payload) == 0:
                raise DecodeError("PLTE length must be a positive multiple of 3", pos)
            palette = np.frombuffer(payload, dtype=np.uint8).reshape(-1, 3)
        elif tag == b"tRNS":
            trns = payload
        elif tag == b"IDAT":
            idat.extend(payload)
        elif tag == b"IEND":
            seen_iend = True
            break
        # ancillary chunks are skipped
    if ihdr is None:
        raise DecodeError("no IHDR chunk", len(data))
    if not seen_iend:
        raise DecodeError("no IEND chunk", len(data))

    width, height, depth, color_type, compression, filt, interlace = ihdr
    if compression != 0 or filt != 0:
        raise DecodeError("unknown compression/filter method", 8)
    if depth != 8:
        raise UnsupportedFormatError(f"bit depth {depth} not supported (8 only)")
    if color_type not in (0, 2, 3, 4, 6):
        raise UnsupportedFormatError(f"color type {color_type} not supported")
    if interlace not in (0, 1):
        raise DecodeError(f"unknown interlace method {interlace}", 8)
    if width < 1 or height < 1:
        raise DecodeError("zero image dimension", 8)
    if color_type == 3 and palette is None:
        raise DecodeError("indexed image without PLTE", len(data))
    if not idat:
        raise DecodeError("no IDAT data", len(data))

    channels = {0: 1, 2: 3, 3: 1, 4: 2, 6: 4}[color_type]
    try:
        raw = zlib.decompress(bytes(idat))
    except zlib.error as exc:
        raise DecodeError(f"IDAT inflate failed: {exc}") from exc

    if interlace == 0:
        grid = _unfilter(raw, width, height, channels, 8).reshape(height, width, channels)
    else:
        grid = np.zeros((height, width, channels), dtype=np.uint8)
        pos = 0
        for row0, col0, rstep, cstep in _ADAM7:
            pw = (width - col0 + cstep - 1) // cstep if width > col0 else 0
            ph = (height - row0 + rstep - 1) // rstep if height > row0 else 0
            if pw == 0 or ph == 0:
                continue
            span = ph * (pw * channels + 1)
            sub = _unfilter(raw[pos : pos + span], pw, ph, channels, 8)
            pos += span
            grid[row0::rstep, col0::cstep] = sub.reshape(ph, pw, channels)

    return _assemble(grid, color_type, palette, trns)


def _assemble(grid: np.ndarray, color_type: int, palette, trns) -> Image:
    if color_type == 0:
        out = grid
        if trns is not None and len(trns) >= 2:
            key = struct.unpack(">H", trns[:2])[0]
            transparent = grid[:, :, 0] == key
            out = out.copy()
            out[transparent] = 255
        return Image(out, GRAY8)
    if color_type == 2:
        out = grid
        if trns is not None and len(trns) >= 6:
            key = struct.unpack(">HHH", trns[:6])
            transparent = np.all(grid == np.array(key, dtype=np.uint16), axis=2)
            out = out.copy()
            out[transparent] = (255, 255, 255)
        return Image(out, RGB8)
    if color_type == 3:
        idx = grid[:, :, 0]
        if int(idx.max()) >= len(palette):
            raise DecodeError("palette index out of range")
        rgb = palette[idx]
        if trns is not None:
            alpha = np.full(len(palette), 255, dtype=np.uint8)
            alpha[: min(len(trns), len(palette))] = np.frombuffer(
                trns[: len(palette)], dtype=np.uint8
            )
            rgb = _composite_over_white(rgb, alpha[idx])
        return Image(rgb, RGB8)
    if color_type == 4:
        gray = _composite_over_white(grid[:, :, :1], grid[:, :, 1])
        return Image(gray, GRAY8)
    # color_type == 6
    rgb = _composite_over_white(grid[:, :, :3], grid[:, :, 3])
    return Image(rgb, RGB8)


# ---------------------------------------------------------------------------
# PPM (P5 grayscale / P6 color), maxval 255, binary body.


def encode_ppm(img: Image) -> bytes:
    """Encode as binary PPM: P5 for GRAY8, P6 for RGB8."""
    magic = b"P5" if img.format == GRAY8 else b"P6"
    header = magic + f"\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.tobytes()


_PPM_WS = b" \t\r\n\x0b\x0c"


def decode_ppm(data: bytes) -> Image:
    """Decode binary PPM (P5 -> GRAY8, P6 -> RGB8); maxval must be 255.

    Header fields are decimal tokens separated by whitespace; '#' starts a
    comment running to end of line. At most one whitespace byte separates
    the maxval from the raster body.
    """
    data = bytes(data)
    if data[:2] == b"P5":
        fmt, channels = GRAY8, 1
    elif data[:2] == b"P6":
        fmt, channels = RGB8, 3
    else:
        raise DecodeError(f"bad magic {data[:2]!r}", 0)

    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(data):
            byte = data[pos]
            if byte in _PPM_WS:
                pos += 1
            elif byte == ord("#"):
                while pos < len(data) and data[pos] != ord("\n"):
                    pos += 1
            else:
                break
        start = pos
        while pos < len(data) and 0x30 <= data[pos] <= 0x39:
            pos += 1
        if pos == start:
            raise DecodeError("expected a numeric header field", start)
        fields.append(int(data[start:pos]))
    if pos < len(data) and data[pos] in _PPM_WS:
        pos += 1  # the single separator before the body

    width, height, maxval = fields
    if maxval != 255:
        raise DecodeError(f"maxval must be 255, got {maxval}", 2)
    if width < 1 or height < 1:
        raise DecodeError("zero image dimension", 2)
    body = data[pos : pos + width * height * channels]
    if len(body) < width * height * channels:
        raise DecodeError("body shorter than width*height*channels", pos)
    arr = np.frombuffer(body, dtype=np.uint8).reshape(height, width, channels)
    return Image(arr, fmt)
