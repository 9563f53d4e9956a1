import numpy as np
import pytest

from imagelab.raster import GRAY8, RGB8, Image


def random_image(rng: np.random.Generator, max_size: int = 32, fmt: str = GRAY8) -> Image:
    w = int(rng.integers(1, max_size + 1))
    h = int(rng.integers(1, max_size + 1))
    channels = 1 if fmt == GRAY8 else 3
    return Image(rng.integers(0, 256, (h, w, channels), dtype=np.uint8), fmt)


def random_binary(rng: np.random.Generator, max_size: int = 16) -> Image:
    w = int(rng.integers(1, max_size + 1))
    h = int(rng.integers(1, max_size + 1))
    arr = np.where(rng.random((h, w, 1)) < 0.5, 255, 0).astype(np.uint8)
    return Image(arr, GRAY8)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260809)
