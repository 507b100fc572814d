"""Shared test helpers: finite-difference oracles, file writers, test images."""

import numpy as np
import pytest


def numeric_grad(f, x, h=1e-5, indices=None):
    """Central finite differences of the scalar function f at array x.

    Perturbs x in place coordinate by coordinate. With `indices`, only those
    flat coordinates are evaluated (the rest stay zero).
    """
    grad = np.zeros_like(x, dtype=np.float64)
    flat = x.ravel()
    gflat = grad.ravel()
    idx = range(flat.size) if indices is None else indices
    for i in idx:
        orig = flat[i]
        flat[i] = orig + h
        f_plus = f()
        flat[i] = orig - h
        f_minus = f()
        flat[i] = orig
        gflat[i] = (f_plus - f_minus) / (2.0 * h)
    return grad


def max_rel_err(analytic, numeric, floor=1e-6, indices=None):
    """Worst relative disagreement; tiny values compare absolutely via floor."""
    analytic = np.asarray(analytic, dtype=np.float64).ravel()
    numeric = np.asarray(numeric, dtype=np.float64).ravel()
    if indices is not None:
        analytic = analytic[list(indices)]
        numeric = numeric[list(indices)]
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float((np.abs(analytic - numeric) / denom).max())


def write_ppm(path, pixels):
    """Binary PPM (P6) writer; pixels is a (H, W, 3) uint8 array."""
    pixels = np.asarray(pixels, dtype=np.uint8)
    h, w, _ = pixels.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())


def write_pgm(path, values):
    """Binary PGM (P5) writer; values is a (H, W) uint8 array."""
    values = np.asarray(values, dtype=np.uint8)
    h, w = values.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(values.tobytes())


QUADRANT_COLORS = (
    (230, 40, 40),    # top-left: red
    (40, 200, 60),    # top-right: green
    (50, 70, 230),    # bottom-left: blue
    (240, 220, 50),   # bottom-right: yellow
)


def four_quadrant_image(size=32):
    """Flat-color four-quadrant test image as a (3, size, size) float64 tensor."""
    half = size // 2
    img = np.zeros((3, size, size), dtype=np.float64)
    patches = ((slice(0, half), slice(0, half)),
               (slice(0, half), slice(half, size)),
               (slice(half, size), slice(0, half)),
               (slice(half, size), slice(half, size)))
    for color, (ys, xs) in zip(QUADRANT_COLORS, patches):
        for c in range(3):
            img[c, ys, xs] = color[c] / 255.0
    return img


def four_quadrant_truth(size=32):
    """Ground-truth label map matching four_quadrant_image."""
    half = size // 2
    gt = np.zeros((size, size), dtype=np.int32)
    gt[:half, half:] = 1
    gt[half:, :half] = 2
    gt[half:, half:] = 3
    return gt


@pytest.fixture
def quadrant_image():
    return four_quadrant_image()


@pytest.fixture
def quadrant_truth():
    return four_quadrant_truth()
