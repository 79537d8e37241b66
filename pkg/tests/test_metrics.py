import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from freqpoison.errors import DimensionMismatch, TooSmall
from freqpoison.metrics import SSIM_C1 as C1, SSIM_C2 as C2, mse, psnr, psnr_from_mse, quality, ssim


def test_identical_images():
    a = np.random.default_rng(0).integers(0, 256, (32, 32, 3), dtype=np.uint8)
    r = quality(a, a)
    assert r.mse == 0 and r.psnr_db == math.inf and r.ssim == 1.0


def test_single_sample_difference():
    a = np.zeros((32, 32, 3), dtype=np.uint8)
    b = a.copy()
    b[3, 4, 1] = 255
    assert mse(a, b) == pytest.approx(255**2 / 3072)
    assert psnr(a, b) == pytest.approx(10 * math.log10(3072), abs=1e-3)
    assert psnr(a, b) == pytest.approx(34.874, abs=1e-3)


def test_off_by_one_everywhere():
    a = np.full((16, 16, 3), 100, dtype=np.uint8)
    assert psnr(a, a + 1) == pytest.approx(48.131, abs=1e-3)


def test_psnr_decreasing_in_mse():
    values = [psnr_from_mse(m) for m in (0.5, 1, 2, 10, 100)]
    assert all(x > y for x, y in zip(values, values[1:]))


def test_ssim_constant_offset_closed_form():
    a = np.full((32, 32, 1), 100, dtype=np.uint8)
    b = a + 10
    expected = (2 * 100 * 110 + C1) / (100**2 + 110**2 + C1)
    assert ssim(a, b) == pytest.approx(expected, abs=1e-9)
    assert 0.9 < ssim(a, b) < 1


def test_ssim_independent_noise_near_zero():
    rng = np.random.default_rng(7)
    a = rng.integers(0, 256, (64, 64, 3), dtype=np.uint8)
    b = rng.integers(0, 256, (64, 64, 3), dtype=np.uint8)
    score = ssim(a, b)
    assert abs(score) < 0.2
    assert score == pytest.approx(0.0128995, abs=1e-6)  # frozen regression value


def test_ssim_against_scipy_filter_formulation():
    from scipy.ndimage import gaussian_filter

    rng = np.random.default_rng(3)
    a = rng.integers(0, 256, (40, 40, 1)).astype(float)
    b = np.clip(a + rng.normal(0, 20, a.shape), 0, 255)
    x, y = a[..., 0], b[..., 0]

    def blur(z):
        return gaussian_filter(z, 1.5, truncate=5 / 1.5, mode="constant")[5:-5, 5:-5]

    mx, my = blur(x), blur(y)
    vx, vy, cxy = blur(x * x) - mx**2, blur(y * y) - my**2, blur(x * y) - mx * my
    ref = ((2 * mx * my + C1) * (2 * cxy + C2) / ((mx**2 + my**2 + C1) * (vx + vy + C2))).mean()
    assert ssim(a, b) == pytest.approx(ref, abs=1e-9)


def test_errors():
    a = np.zeros((16, 16, 3), dtype=np.uint8)
    with pytest.raises(DimensionMismatch):
        psnr(a, np.zeros((16, 16, 1), dtype=np.uint8))
    with pytest.raises(TooSmall):
        ssim(np.zeros((10, 10, 1), dtype=np.uint8), np.zeros((10, 10, 1), dtype=np.uint8))


imgs = arrays(np.uint8, (12, 12, 3))


@given(imgs, imgs)
@settings(max_examples=50, deadline=None)
def test_symmetry(a, b):
    assert psnr(a, b) == psnr(b, a)
    assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)
    assert -1 <= ssim(a, b) <= 1
