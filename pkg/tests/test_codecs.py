import io
import struct
import zlib

import numpy as np
import pytest
from PIL import Image as PILImage

from imagelab.codecs import PNG_SIGNATURE, decode_png, decode_ppm, encode_png, encode_ppm
from imagelab.errors import DecodeError, UnsupportedFormatError
from imagelab.raster import GRAY8, RGB8, Image

from conftest import random_image


def _chunk(tag: bytes, payload: bytes) -> bytes:
    crc = zlib.crc32(tag + payload) & 0xFFFFFFFF
    return struct.pack(">I", len(payload)) + tag + payload + struct.pack(">I", crc)


def _png(width, height, depth, color_type, raw, extra_chunks=(), interlace=0):
    ihdr = struct.pack(">IIBBBBB", width, height, depth, color_type, 0, 0, interlace)
    out = PNG_SIGNATURE + _chunk(b"IHDR", ihdr)
    for tag, payload in extra_chunks:
        out += _chunk(tag, payload)
    return out + _chunk(b"IDAT", zlib.compress(raw)) + _chunk(b"IEND", b"")


# --- round trips -------------------------------------------------------------


def test_round_trip_random_images(rng):
    for _ in range(50):
        fmt = GRAY8 if rng.random() < 0.5 else RGB8
        img = random_image(rng, 16, fmt)
        assert decode_png(encode_png(img)) == img


def test_encode_deterministic(rng):
    img = random_image(rng, 16, RGB8)
    assert encode_png(img) == encode_png(img)


def test_signature_prefix():
    assert encode_png(Image(np.zeros((1, 1), np.uint8), GRAY8))[:8] == PNG_SIGNATURE


# --- hand-built fixtures -----------------------------------------------------


def test_hand_built_1x1_grayscale():
    # one row: filter byte 0 then the single sample 0
    data = _png(1, 1, 8, 0, b"\x00\x00")
    img = decode_png(data)
    assert img.format == GRAY8
    assert img.tobytes() == b"\x00"


def test_hand_built_palette():
    plte = bytes([255, 0, 0, 0, 255, 0])  # index 0 red, 1 green
    raw = b"\x00\x00\x01"  # one row, two pixels: 0 then 1
    img = decode_png(_png(2, 1, 8, 3, raw, extra_chunks=[(b"PLTE", plte)]))
    assert img.format == RGB8
    assert img.tobytes() == bytes([255, 0, 0, 0, 255, 0])


def test_hand_built_gray_alpha_composites_over_white():
    # 1x1, gray 0 with alpha 0 -> pure white
    img = decode_png(_png(1, 1, 8, 4, b"\x00\x00\x00"))
    assert img.tobytes() == b"\xff"
    # half transparent black: 0*0.5 + 255*0.5 = 127.5 -> 128
    img = decode_png(_png(1, 1, 8, 4, b"\x00\x00\x80"))
    assert img.tobytes() == bytes([round(255 * (1 - 128 / 255))])


def test_hand_built_interlaced_matches_sequential(rng):
    # Adam7: serialize each pass as its own filter-0 sub-image
    passes = [(0, 0, 8, 8), (0, 4, 8, 8), (4, 0, 8, 4), (0, 2, 4, 4),
              (2, 0, 4, 2), (0, 1, 2, 2), (1, 0, 2, 1)]
    for _ in range(5):
        w = int(rng.integers(1, 12))
        h = int(rng.integers(1, 12))
        arr = rng.integers(0, 256, (h, w), dtype=np.uint8)
        raw = bytearray()
        for row0, col0, rstep, cstep in passes:
            sub = arr[row0::rstep, col0::cstep]
            if sub.size == 0:
                continue
            for row in sub:
                raw.append(0)
                raw.extend(row.tobytes())
        data = _png(w, h, 8, 0, bytes(raw), interlace=1)
        assert decode_png(data).tobytes() == arr.tobytes()
        # Pillow agrees the fixture itself is well-formed
        pil = PILImage.open(io.BytesIO(data))
        assert np.asarray(pil).tobytes() == arr.tobytes()


# --- error paths -------------------------------------------------------------


def test_truncated_stream():
    data = encode_png(Image(np.zeros((4, 4), np.uint8), GRAY8))
    with pytest.raises(DecodeError):
        decode_png(data[: len(data) // 2])


def test_bad_signature():
    with pytest.raises(DecodeError):
        decode_png(b"not a png at all")


def test_crc_corruption_reports_offset():
    data = bytearray(encode_png(Image(np.zeros((4, 4), np.uint8), GRAY8)))
    data[20] ^= 0xFF  # inside IHDR payload
    with pytest.raises(DecodeError) as err:
        decode_png(bytes(data))
    assert err.value.offset is not None


def test_16_bit_rejected():
    # hand-built 2x2 16-bit grayscale: rows are filter byte + 2 samples x 2 bytes
    raw = (b"\x00" + bytes(4)) * 2
    with pytest.raises(UnsupportedFormatError):
        decode_png(_png(2, 2, 16, 0, raw))


def test_fuzzed_streams_never_return_malformed_buffers(rng):
    base = bytearray(encode_png(random_image(rng, 8, RGB8)))
    for _ in range(300):
        mutated = bytearray(base)
        for _ in range(int(rng.integers(1, 6))):
            mutated[int(rng.integers(0, len(mutated)))] = int(rng.integers(0, 256))
        try:
            img = decode_png(bytes(mutated))
        except (DecodeError, UnsupportedFormatError):
            continue
        assert img.pixels.shape == (img.height, img.width, img.channels)
        assert img.pixels.dtype == np.uint8


# --- cross-checks with an independent codec ----------------------------------


def test_pillow_decodes_our_output(rng):
    for fmt in (GRAY8, RGB8):
        img = random_image(rng, 12, fmt)
        pil = PILImage.open(io.BytesIO(encode_png(img)))
        arr = np.asarray(pil)
        if fmt == GRAY8:
            arr = arr[:, :, np.newaxis]
        assert arr.tobytes() == img.tobytes()


@pytest.mark.parametrize("mode", ["L", "RGB", "P"])
def test_we_decode_pillow_output(rng, mode):
    arr = rng.integers(0, 256, (9, 7, 3), dtype=np.uint8)
    pil = PILImage.fromarray(arr, mode="RGB").convert(mode)
    buf = io.BytesIO()
    pil.save(buf, "PNG")
    ours = decode_png(buf.getvalue())
    reference = np.asarray(pil.convert("L" if mode == "L" else "RGB"))
    if mode == "L":
        reference = reference[:, :, np.newaxis]
    assert ours.tobytes() == reference.tobytes()


def test_alpha_composited_over_white_matches_reference(rng):
    rgba = rng.integers(0, 256, (6, 5, 4), dtype=np.uint8)
    buf = io.BytesIO()
    PILImage.fromarray(rgba, mode="RGBA").save(buf, "PNG")
    ours = decode_png(buf.getvalue())
    a = rgba[:, :, 3:].astype(np.float64) / 255.0
    expected = np.floor(rgba[:, :, :3] * a + 255.0 * (1 - a) + 0.5).astype(np.uint8)
    assert ours.tobytes() == expected.tobytes()


def test_average_filter_sum_above_255():
    # row 2 uses Average; left + above = 310 must not wrap before halving
    raw = b"\x00" + bytes([200, 200]) + b"\x03" + bytes([10, 10])
    img = decode_png(_png(2, 2, 8, 0, raw))
    assert img.tobytes() == bytes([200, 200, 110, 165])


def test_all_filter_types_via_pillow(rng):
    # larger natural-ish image makes Pillow's encoder exercise Sub/Up/Avg/Paeth
    base = np.add.outer(np.arange(64), np.arange(64)).astype(np.uint8)
    noise = rng.integers(0, 30, base.shape, dtype=np.uint8)
    arr = (base + noise).astype(np.uint8)
    buf = io.BytesIO()
    PILImage.fromarray(arr, mode="L").save(buf, "PNG")
    assert decode_png(buf.getvalue()).tobytes() == arr.tobytes()


# --- PPM ---------------------------------------------------------------------


def test_ppm_header_fixture():
    img = decode_ppm(b"P5 1 1 255" + bytes([0x00]))
    assert img.format == GRAY8
    assert img.tobytes() == b"\x00"


def test_ppm_round_trip(rng):
    for fmt in (GRAY8, RGB8):
        img = random_image(rng, 10, fmt)
        assert decode_ppm(encode_ppm(img)) == img


def test_ppm_comments_and_whitespace():
    data = b"P5\n# a comment\n 2 \t1\n# another\n255\n" + bytes([1, 2])
    img = decode_ppm(data)
    assert img.width == 2 and img.tobytes() == bytes([1, 2])


def test_ppm_bad_magic():
    with pytest.raises(DecodeError):
        decode_ppm(b"P7 1 1 255\x00")


def test_ppm_bad_maxval():
    with pytest.raises(DecodeError):
        decode_ppm(b"P5 1 1 65535 " + bytes(2))


def test_ppm_short_body():
    with pytest.raises(DecodeError):
        decode_ppm(b"P6 2 2 255 " + bytes(5))


def test_ppm_cross_checked_with_pillow(rng):
    for fmt in (GRAY8, RGB8):
        img = random_image(rng, 9, fmt)
        pil = PILImage.open(io.BytesIO(encode_ppm(img)))
        arr = np.asarray(pil)
        if fmt == GRAY8:
            arr = arr[:, :, np.newaxis]
        assert arr.tobytes() == img.tobytes()
        # and the reverse: Pillow-written PPM decodes identically
        buf = io.BytesIO()
        pil.save(buf, "PPM")
        assert decode_ppm(buf.getvalue()) == img


def test_ppm_fuzzed_streams_never_return_malformed_buffers(rng):
    base = bytearray(encode_ppm(random_image(rng, 8, RGB8)))
    for _ in range(300):
        mutated = bytearray(base)
        for _ in range(int(rng.integers(1, 5))):
            mutated[int(rng.integers(0, len(mutated)))] = int(rng.integers(0, 256))
        try:
            img = decode_ppm(bytes(mutated))
        except DecodeError:
            continue
        assert img.pixels.shape == (img.height, img.width, img.channels)
        assert img.pixels.dtype == np.uint8
