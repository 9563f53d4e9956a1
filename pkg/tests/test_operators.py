import math

import numpy as np
import pytest

import oracles
from conftest import random_binary, random_image
from imagelab import operators as ops
from imagelab.errors import (
    FormatError,
    InvalidKernelError,
    NoBackgroundError,
    ParameterError,
)
from imagelab.raster import GRAY8, RGB8, Image, new_image


def gray(rows) -> Image:
    return Image(np.array(rows, dtype=np.uint8), GRAY8)


# --- to_grayscale ------------------------------------------------------------


def test_grayscale_white():
    img = new_image(1, 1, RGB8, 255)
    assert ops.to_grayscale(img).tobytes() == b"\xff"


def test_grayscale_red_weight():
    img = Image(np.array([[[255, 0, 0]]], dtype=np.uint8), RGB8)
    assert ops.to_grayscale(img).tobytes() == bytes([76])  # round(0.299 * 255)


def test_grayscale_identity_on_gray():
    img = new_image(3, 3, GRAY8, 40)
    assert ops.to_grayscale(img) is img


def test_grayscale_matches_oracle(rng):
    img = random_image(rng, 12, RGB8)
    assert ops.to_grayscale(img).pixels.tolist() == oracles.to_grayscale(img.pixels).tolist()


# --- convolve ----------------------------------------------------------------


def test_convolve_identity_kernel(rng):
    img = random_image(rng, 10, RGB8)
    kernel = ops.Kernel([[0, 0, 0], [0, 1, 0], [0, 0, 0]])
    assert ops.convolve(img, kernel) == img


def test_convolve_1x1_kernel(rng):
    img = random_image(rng, 10, GRAY8)
    assert ops.convolve(img, ops.Kernel([[1.0]])) == img


def test_convolve_even_kernel_rejected():
    with pytest.raises(InvalidKernelError):
        ops.Kernel(np.ones((2, 2)))


def test_mean_kernel_impulse():
    img = gray([[0, 0, 0], [0, 9, 0], [0, 0, 0]])
    kernel = ops.Kernel(np.ones((3, 3)))
    out = ops.convolve(img, kernel, normalize=True)
    expected = oracles.convolve(img.pixels, [[1.0] * 3] * 3, normalize=True)
    assert out.pixels.tolist() == expected.tolist()
    assert set(np.unique(out.pixels)) == {1}


def test_normalize_skipped_for_zero_sum_kernel(rng):
    img = random_image(rng, 8, GRAY8)
    weights = [[1.0, -1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]
    kernel = ops.Kernel(weights)
    normalized = ops.convolve(img, kernel, normalize=True)
    plain = ops.convolve(img, kernel, normalize=False)
    assert normalized == plain  # sum is 0, so no division happens


# --- box blur ----------------------------------------------------------------


def test_box_blur_k1_identity(rng):
    img = random_image(rng, 8, RGB8)
    assert ops.box_blur(img, 1) == img


def test_box_blur_constant_fixed_point():
    img = new_image(6, 4, GRAY8, 77)
    for k in (1, 3, 5):
        assert ops.box_blur(img, k) == img


def test_box_blur_even_k():
    with pytest.raises(InvalidKernelError):
        ops.box_blur(new_image(3, 3, GRAY8), 4)


# --- gaussian ----------------------------------------------------------------


def test_gaussian_uniform_unchanged():
    img = new_image(5, 5, GRAY8, 123)
    assert ops.gaussian_blur(img, 5) == img


def test_gaussian_impulse_symmetric():
    arr = np.zeros((9, 9), np.uint8)
    arr[4, 4] = 255
    out = ops.gaussian_blur(Image(arr, GRAY8), 5, 1.0).pixels[:, :, 0]
    assert np.array_equal(out, out[:, ::-1])
    assert np.array_equal(out, out[::-1, :])


def test_gaussian_separable_vs_direct_2d(rng):
    arr = rng.integers(0, 256, (8, 8, 1), dtype=np.uint8)
    img = Image(arr, GRAY8)
    separable = ops.gaussian_blur(img, 5, 1.2).pixels.astype(np.int64)
    direct = oracles.gaussian_2d(arr, 5, 1.2).astype(np.int64)
    assert np.abs(separable - direct).max() <= 1


def test_gaussian_bad_sigma():
    with pytest.raises(ParameterError):
        ops.gaussian_blur(new_image(3, 3, GRAY8), 3, -1.0)


def test_gaussian_weights_normalized():
    for k in (1, 3, 5, 7):
        assert abs(ops.gaussian_kernel_1d(k).sum() - 1.0) <= 1e-6


# --- median ------------------------------------------------------------------


def test_median_k1_identity(rng):
    img = random_image(rng, 8, GRAY8)
    assert ops.median_blur(img, 1) == img


def test_median_constant():
    img = new_image(4, 4, RGB8, 200)
    assert ops.median_blur(img, 3) == img


def test_median_removes_outlier():
    img = gray([[10, 10, 10], [10, 255, 10], [10, 10, 10]])
    out = ops.median_blur(img, 3)
    assert out.pixels[1, 1, 0] == 10
    assert out.pixels.tolist() == oracles.median(img.pixels, 3).tolist()


# --- threshold / otsu --------------------------------------------------------


def test_threshold_below():
    assert ops.threshold_binary(new_image(1, 1, GRAY8, 100), 128).tobytes() == b"\x00"


def test_threshold_above():
    assert ops.threshold_binary(new_image(1, 1, GRAY8, 200), 128, 255).tobytes() == b"\xff"


def test_threshold_255_all_zero(rng):
    img = random_image(rng, 8, GRAY8)
    assert set(np.unique(ops.threshold_binary(img, 255).pixels)) == {0}


def test_threshold_requires_gray():
    with pytest.raises(FormatError):
        ops.threshold_binary(new_image(2, 2, RGB8), 10)


def test_otsu_constant_zero_image():
    t, out = ops.otsu_threshold(new_image(4, 4, GRAY8, 0))
    assert t == 0
    assert set(np.unique(out.pixels)) == {0}


def test_otsu_two_level():
    img = gray([[10, 10, 10, 10], [200, 200, 200, 200]])
    t, out = ops.otsu_threshold(img)
    assert 10 <= t <= 199
    assert sorted(np.unique(out.pixels)) == [0, 255]
    assert int((out.pixels == 255).sum()) == 4


def test_otsu_matches_exhaustive_oracle(rng):
    for _ in range(25):
        img = random_image(rng, 16, GRAY8)
        t, _ = ops.otsu_threshold(img)
        assert t == oracles.otsu(img.pixels)


# --- sobel / laplacian -------------------------------------------------------


def test_sobel_constant_zero():
    field = ops.sobel(new_image(5, 5, GRAY8, 99))
    assert not field.gx.values.any()
    assert not field.gy.values.any()
    assert not field.magnitude.values.any()


def test_sobel_vertical_edge_center():
    img = gray([[0, 0, 255]] * 3)
    field = ops.sobel(img, 1, 0)
    assert field.gx.values[1, 1] == 1020
    expected = oracles.correlate_signed(img.pixels[:, :, 0], oracles.SOBEL_X)
    assert np.array_equal(field.gx.values, expected.astype(np.float32))


def test_sobel_horizontal_stripes_no_gx(rng):
    rows = rng.integers(0, 256, (6, 1), dtype=np.uint8)
    img = Image(np.repeat(rows, 5, axis=1), GRAY8)
    assert not ops.sobel(img, 1, 1).gx.values.any()


def test_sobel_magnitude_invariant(rng):
    img = random_image(rng, 12, GRAY8)
    field = ops.sobel(img)
    expected = np.sqrt(field.gx.values.astype(np.float64) ** 2 + field.gy.values ** 2)
    mask = expected > 0
    assert np.allclose(field.magnitude.values[mask], expected[mask], rtol=1e-4)


def test_sobel_parameters():
    with pytest.raises(ParameterError):
        ops.sobel(new_image(3, 3, GRAY8), 0, 0)
    with pytest.raises(FormatError):
        ops.sobel(new_image(3, 3, RGB8))


def test_laplacian_constant_zero():
    out = ops.laplacian(new_image(4, 4, GRAY8, 50))
    assert set(np.unique(out.pixels)) == {0}


def test_laplacian_ramp_interior_zero():
    img = Image(np.tile(np.arange(8, dtype=np.uint8) * 10, (4, 1)), GRAY8)
    out = ops.laplacian(img).pixels[:, :, 0]
    assert not out[:, 1:-1].any()  # second difference of a linear ramp
    expected = oracles.correlate_signed(img.pixels[:, :, 0], oracles.LAPLACIAN)
    assert np.array_equal(out, np.abs(expected).astype(np.uint8))


def test_laplacian_impulse_echo():
    arr = np.zeros((5, 5), np.uint8)
    arr[2, 2] = 100
    out = ops.laplacian(Image(arr, GRAY8)).pixels[:, :, 0]
    expected = oracles.correlate_signed(arr.astype(np.float64), oracles.LAPLACIAN)
    display = np.clip(np.abs(expected), 0, 255).astype(np.int64)
    assert np.array_equal(out.astype(np.int64), display)
    assert out[2, 2] == 255  # |-400| clamps


# --- canny -------------------------------------------------------------------


def test_canny_constant_zero():
    out = ops.canny(new_image(8, 8, GRAY8, 90), 50, 100)
    assert set(np.unique(out.pixels)) == {0}


def test_canny_output_binary(rng):
    img = random_image(rng, 16, GRAY8)
    out = ops.canny(img, 30, 90)
    assert set(np.unique(out.pixels)) <= {0, 255}


def test_canny_step_edge_single_column():
    # golden fixture: hand-stepped through blur profile/gx/nms (see note below)
    arr = np.zeros((16, 16), np.uint8)
    arr[:, 8:] = 255
    out = ops.canny(Image(arr, GRAY8), 50, 100).pixels[:, :, 0]

    # independent 1-D recomputation: rows are constant so the pipeline is 1-D
    sigma = 0.3 * ((5 - 1) / 2 - 1) + 0.8
    w = [math.exp(-(i * i) / (2 * sigma * sigma)) for i in (-2, -1, 0, 1, 2)]
    w = [v / sum(w) for v in w]
    profile = []
    for x in range(16):
        acc = sum(w[j] * (255.0 if min(max(x + j - 2, 0), 15) >= 8 else 0.0) for j in range(5))
        profile.append(math.floor(acc + 0.5))
    gx = [4 * (profile[min(x + 1, 15)] - profile[max(x - 1, 0)]) for x in range(16)]
    peak = max(gx)
    edge_col = gx.index(peak)  # first column of the symmetric plateau survives
    assert gx.count(peak) == 2 and edge_col == 7

    expected = np.zeros((16, 16), np.uint8)
    expected[:, edge_col] = 255
    assert np.array_equal(out, expected)


def test_canny_bad_thresholds():
    with pytest.raises(ParameterError):
        ops.canny(new_image(4, 4, GRAY8), 100, 50)


def test_canny_edges_have_magnitude_at_least_low(rng):
    for _ in range(5):
        img = random_image(rng, 16, GRAY8)
        low, high = 40.0, 120.0
        out = ops.canny(img, low, high)
        blurred = ops.gaussian_blur(img, 5)
        mag = ops.sobel(blurred).magnitude.values
        edge_mask = out.pixels[:, :, 0] == 255
        assert np.all(mag[edge_mask] >= low)


# --- morphology --------------------------------------------------------------


def test_morphology_all_zero_fixed_point():
    img = new_image(5, 5, GRAY8, 0)
    assert ops.morphology(img, ops.ERODE, 3) == img
    assert ops.morphology(img, ops.DILATE, 3) == img


def test_dilate_center_impulse():
    arr = np.zeros((5, 5), np.uint8)
    arr[2, 2] = 255
    out = ops.morphology(Image(arr, GRAY8), ops.DILATE, 3).pixels[:, :, 0]
    expected = np.zeros((5, 5), np.uint8)
    expected[1:4, 1:4] = 255
    assert np.array_equal(out, expected)


def test_morphology_duality(rng):
    for _ in range(10):
        img = random_image(rng, 10, GRAY8)
        inverted = Image(255 - img.pixels, GRAY8)
        left = ops.morphology(inverted, ops.DILATE, 3)
        right = Image(255 - ops.morphology(img, ops.ERODE, 3).pixels, GRAY8)
        assert left == right
        # windowed max oracle agrees
        assert left.pixels.tolist() == oracles.morphology(inverted.pixels, "DILATE", 3).tolist()


def test_morphology_sandwich(rng):
    img = random_image(rng, 10, RGB8)
    eroded = ops.morphology(img, ops.ERODE, 3)
    dilated = ops.morphology(img, ops.DILATE, 3)
    assert np.all(eroded.pixels <= img.pixels)
    assert np.all(img.pixels <= dilated.pixels)


def test_opening_idempotent(rng):
    for _ in range(5):
        img = random_binary(rng, 12)
        def opening(x):
            return ops.morphology(ops.morphology(x, ops.ERODE, 3), ops.DILATE, 3)
        once = opening(img)
        assert opening(once) == once


# --- resize / rotate / flip --------------------------------------------------


def test_resize_identity(rng):
    img = random_image(rng, 8, RGB8)
    assert ops.resize(img, 1.0, 1.0, ops.NEAREST) == img
    assert ops.resize(img, 1.0, 1.0, ops.BILINEAR) == img


def test_resize_2x2_down_to_1():
    img = gray([[0, 255], [255, 0]])
    out = ops.resize(img, 0.5, 0.5, ops.BILINEAR)
    expected = oracles.resize(img.pixels, 0.5, 0.5, "BILINEAR")
    assert (out.width, out.height) == (1, 1)
    assert out.pixels.tolist() == expected.tolist()
    assert out.pixels[0, 0, 0] == 128  # mean of the four corners, rounded up


def test_resize_half_dims():
    img = new_image(4, 4, GRAY8, 10)
    out = ops.resize(img, 0.5, 0.5, ops.NEAREST)
    assert (out.width, out.height) == (2, 2)


def test_resize_matches_oracle(rng):
    for interp in (ops.NEAREST, ops.BILINEAR):
        img = random_image(rng, 9, RGB8)
        fx, fy = float(rng.uniform(0.3, 2.5)), float(rng.uniform(0.3, 2.5))
        out = ops.resize(img, fx, fy, interp)
        assert out.pixels.tolist() == oracles.resize(img.pixels, fx, fy, interp).tolist()


def test_resize_bad_factor():
    with pytest.raises(ParameterError):
        ops.resize(new_image(2, 2, GRAY8), 0.0, 1.0, ops.NEAREST)


def test_flip_involution(rng):
    img = random_image(rng, 9, RGB8)
    assert ops.flip(ops.flip(img, "H"), "H") == img
    assert ops.flip(ops.flip(img, "V"), "V") == img


def test_rotate_four_times_identity(rng):
    img = random_image(rng, 9, RGB8)
    out = img
    for _ in range(4):
        out = ops.rotate(out, 90)
    assert out == img


def test_rotate_90_mapping():
    img = Image(np.array([[1, 2]], dtype=np.uint8), GRAY8)  # 2x1 [a, b]
    out = ops.rotate(img, 90)
    assert (out.width, out.height) == (1, 2)
    assert out.pixels[:, :, 0].tolist() == [[1], [2]]  # column [a, b]


def test_rotate_bad_angle():
    with pytest.raises(ParameterError):
        ops.rotate(new_image(2, 2, GRAY8), 45)


# --- drawing -----------------------------------------------------------------


def test_draw_line_top_row():
    img = new_image(3, 3, GRAY8, 0)
    out = ops.draw_primitive(img, "LINE", [0, 0, 2, 0], (255,))
    assert out.pixels[0, :, 0].tolist() == [255, 255, 255]
    assert not out.pixels[1:].any()


def test_draw_circle_radius_zero():
    img = new_image(5, 5, GRAY8, 0)
    out = ops.draw_primitive(img, "CIRCLE", [2, 2, 0], (9,))
    assert out.pixels[2, 2, 0] == 9
    assert int((out.pixels != 0).sum()) == 1


def test_draw_rect_ring():
    img = new_image(3, 3, GRAY8, 0)
    out = ops.draw_primitive(img, "RECT", [0, 0, 2, 2], (255,))
    expected = [[255, 255, 255], [255, 0, 255], [255, 255, 255]]
    assert out.pixels[:, :, 0].tolist() == expected


def test_draw_clips_out_of_bounds():
    img = new_image(3, 3, GRAY8, 0)
    out = ops.draw_primitive(img, "LINE", [-5, -5, 10, -5], (255,))
    assert not out.pixels.any()


def test_draw_negative_radius():
    with pytest.raises(ParameterError):
        ops.draw_primitive(new_image(3, 3, GRAY8), "CIRCLE", [1, 1, -2], (255,))


# --- distance transform ------------------------------------------------------


def test_distance_1x3():
    img = gray([[255, 255, 0]])
    assert ops.distance_transform(img).values.tolist() == [[2.0, 1.0, 0.0]]


def test_distance_all_zero():
    img = new_image(4, 4, GRAY8, 0)
    assert not ops.distance_transform(img).values.any()


def test_distance_no_background():
    with pytest.raises(NoBackgroundError):
        ops.distance_transform(new_image(3, 3, GRAY8, 255))


def test_distance_matches_brute_force(rng):
    for _ in range(25):
        img = random_binary(rng, 16)
        if img.pixels.all():
            continue
        got = ops.distance_transform(img).values.astype(np.int64)
        assert np.array_equal(got, oracles.distance_l1(img.pixels))


# --- contours ----------------------------------------------------------------


def test_contours_empty_image():
    assert len(ops.find_contours(new_image(4, 4, GRAY8, 0))) == 0


def test_contours_2x2_block():
    arr = np.zeros((4, 4), np.uint8)
    arr[1:3, 1:3] = 255
    cs = ops.find_contours(Image(arr, GRAY8))
    assert len(cs) == 1
    assert set(cs.contours[0].points) == {(1, 1), (2, 1), (2, 2), (1, 2)}
    # clockwise from the topmost-leftmost pixel
    assert cs.contours[0].points[0] == (1, 1)


def _traced_points(img):
    traced = set()
    for contour in ops.find_contours(img).contours:
        traced |= set(contour.points)
    return traced


def test_contours_are_boundary_pixels(rng):
    # every traced point touches background; the reverse only holds for
    # shapes without concave diagonal corners or holes
    for _ in range(10):
        img = random_binary(rng, 12)
        assert _traced_points(img) <= oracles.boundary_pixels(img.pixels)


def test_contours_boundary_equality_on_rectangles(rng):
    # solid rectangles have no concave corners, so the trace covers exactly
    # the pixels with a background 8-neighbor
    for _ in range(15):
        arr = np.zeros((14, 14), np.uint8)
        x0, y0 = int(rng.integers(0, 8)), int(rng.integers(0, 8))
        arr[y0 : y0 + int(rng.integers(1, 7)), x0 : x0 + int(rng.integers(1, 7))] = 255
        img = Image(arr, GRAY8)
        assert _traced_points(img) == oracles.boundary_pixels(img.pixels)


def test_contours_one_per_component(rng):
    for _ in range(10):
        img = random_binary(rng, 12)
        assert len(ops.find_contours(img)) == oracles.count_components(img.pixels)


def test_contours_two_blocks():
    arr = np.zeros((5, 8), np.uint8)
    arr[1:3, 1:3] = 255
    arr[1:3, 5:7] = 255
    assert len(ops.find_contours(Image(arr, GRAY8))) == 2


def test_contour_adjacency_and_closure(rng):
    for _ in range(10):
        img = random_binary(rng, 10)
        for contour in ops.find_contours(img).contours:
            pts = contour.points
            for a, b in zip(pts, pts[1:]):
                assert max(abs(a[0] - b[0]), abs(a[1] - b[1])) == 1
            if len(pts) > 1:
                a, b = pts[-1], pts[0]
                assert max(abs(a[0] - b[0]), abs(a[1] - b[1])) == 1


def test_draw_contours():
    arr = np.zeros((4, 4), np.uint8)
    arr[1:3, 1:3] = 255
    cs = ops.find_contours(Image(arr, GRAY8))
    canvas = new_image(4, 4, GRAY8, 0)
    out = ops.draw_contours(canvas, cs, (200,))
    assert int((out.pixels == 200).sum()) == 4
    # empty set leaves the image unchanged
    empty = ops.ContourSet((), 4, 4)
    assert ops.draw_contours(canvas, empty, (200,)) == canvas


def test_draw_contours_clips_out_of_bounds():
    contour = ops.Contour(((0, 0), (5, 5), (-1, 2)))
    cs = ops.ContourSet((contour,), 6, 6)
    canvas = new_image(2, 2, GRAY8, 0)
    out = ops.draw_contours(canvas, cs, (9,))
    assert out.pixels[0, 0, 0] == 9
    assert int((out.pixels != 0).sum()) == 1  # the rest fell outside


# --- histogram / equalize ----------------------------------------------------


def test_histogram_counts():
    img = gray([[0, 0], [255, 128]])
    hist = ops.histogram(img)
    assert hist.bins[0, 0] == 2
    assert hist.bins[0, 128] == 1
    assert hist.bins[0, 255] == 1
    assert hist.bins.sum() == 4


def test_histogram_bin_sum(rng):
    img = random_image(rng, 8, RGB8)
    hist = ops.histogram(img)
    assert np.all(hist.bins.sum(axis=1) == img.width * img.height)


def test_histogram_permutation_invariant(rng):
    img = random_image(rng, 8, RGB8)
    reference = ops.histogram(img).bins.tolist()
    assert ops.histogram(ops.flip(img, "H")).bins.tolist() == reference
    assert ops.histogram(ops.rotate(img, 90)).bins.tolist() == reference


def test_equalize_monotone(rng):
    img = random_image(rng, 12, GRAY8)
    out = ops.equalize_histogram(img)
    flat_in = img.pixels.reshape(-1)
    flat_out = out.pixels.reshape(-1)
    order = np.argsort(flat_in, kind="stable")
    assert np.all(np.diff(flat_out[order].astype(np.int64)) >= -0)


def test_equalize_constant_maps_to_zero():
    out = ops.equalize_histogram(new_image(4, 4, GRAY8, 99))
    assert set(np.unique(out.pixels)) == {0}


def test_equalize_two_pixel():
    img = gray([[0, 255]])
    out = ops.equalize_histogram(img)
    assert out.pixels.reshape(-1).tolist() == oracles.equalize(img.pixels).reshape(-1).tolist()
    assert out.pixels.reshape(-1).tolist() == [0, 255]


def test_equalize_matches_oracle(rng):
    img = random_image(rng, 10, GRAY8)
    out = ops.equalize_histogram(img)
    assert out.pixels.tolist() == oracles.equalize(img.pixels).tolist()
