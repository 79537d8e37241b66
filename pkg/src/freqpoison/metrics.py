"""PSNR and SSIM on 8-bit images."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DimensionMismatch, TooSmall

MAX_LEVEL = 255.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = (0.01 * MAX_LEVEL) ** 2
SSIM_C2 = (0.03 * MAX_LEVEL) ** 2


@dataclass(frozen=True)
class QualityReport:
    psnr_db: float
    ssim: float
    mse: float


def _pair(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    return a.astype(np.float64), b.astype(np.float64)


def mse(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.mean((a - b) ** 2))


def psnr_from_mse(m: float) -> float:
    return math.inf if m == 0 else 10.0 * math.log10(MAX_LEVEL ** 2 / m)


def psnr(a, b) -> float:
    """PSNR in dB with the MSE pooled over every pixel and channel."""
    return psnr_from_mse(mse(a, b))


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    ax = np.arange(size) - (size - 1) / 2
    g = np.exp(-(ax ** 2) / (2 * sigma ** 2))
    w = np.outer(g, g)
    return w / w.sum()


def _local_mean(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    # valid-mode weighted window mean
    return np.einsum("ijkl,kl->ij", sliding_window_view(x, w.shape), w)


def ssim_map(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Local SSIM of two 2-D planes (valid windows only)."""
    w = gaussian_window()
    mu_a = _local_mean(a, w)
    mu_b = _local_mean(b, w)
    var_a = _local_mean(a * a, w) - mu_a ** 2
    var_b = _local_mean(b * b, w) - mu_b ** 2
    cov = _local_mean(a * b, w) - mu_a * mu_b
    num = (2 * mu_a * mu_b + SSIM_C1) * (2 * cov + SSIM_C2)
    den = (mu_a ** 2 + mu_b ** 2 + SSIM_C1) * (var_a + var_b + SSIM_C2)
    return num / den


def ssim(a, b) -> float:
    """Mean SSIM, computed per channel and averaged over channels."""
    a, b = _pair(a, b)
    if a.ndim == 2:
        a, b = a[:, :, None], b[:, :, None]
    if min(a.shape[:2]) < SSIM_WINDOW:
        raise TooSmall(f"SSIM needs both sides >= {SSIM_WINDOW}, got {a.shape[:2]}")
    if np.array_equal(a, b):
        return 1.0
    return float(np.mean([ssim_map(a[:, :, c], b[:, :, c]).mean() for c in range(a.shape[2])]))


def quality(a, b) -> QualityReport:
    m = mse(a, b)
    return QualityReport(psnr_from_mse(m), ssim(a, b), m)
