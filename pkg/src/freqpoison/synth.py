"""Seeded synthetic imagery for tests, demos and the kernel simulator."""

from __future__ import annotations

import numpy as np


def pink_noise(shape, rng: np.random.Generator, alpha: float = 2.0) -> np.ndarray:
    """Zero-mean, unit-variance field with a ``1/f**alpha`` power spectrum."""
    h, w = shape
    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.rfftfreq(w)[None, :]
    f = np.sqrt(fx ** 2 + fy ** 2)
    f[0, 0] = 1.0
    spec = (rng.standard_normal((h, w // 2 + 1)) + 1j * rng.standard_normal((h, w // 2 + 1))) / f ** (alpha / 2)
    spec[0, 0] = 0.0
    field = np.fft.irfft2(spec, s=(h, w))
    return (field - field.mean()) / (field.std() + 1e-12)


def natural_texture(size: int, rng: np.random.Generator, channels: int = 3, contrast: float = 50.0) -> np.ndarray:
    """One natural-looking RGB (or gray) image.

    Channels share a luminance field plus a weaker per-channel chroma field,
    which mimics the strong inter-channel correlation of photographs.
    """
    lum = pink_noise((size, size), rng)
    base = rng.uniform(70, 185)
    planes = []
    for _ in range(channels):
        chroma = pink_noise((size, size), rng)
        planes.append(base + rng.uniform(-25, 25) + contrast * (0.85 * lum + 0.35 * chroma))
    return np.rint(np.clip(np.stack(planes, axis=2), 0, 255)).astype(np.uint8)


def texture_corpus(count: int, size: int = 32, seed: int = 0, channels: int = 3) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    return [natural_texture(size, rng, channels) for _ in range(count)]
