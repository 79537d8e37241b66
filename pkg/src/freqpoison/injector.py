"""Frequency-domain trigger injection into a single block/channel.

A poisoned block is produced in three stages:

1. ``inject_frequency``: the trigger's amplitude spectrum is mixed into the
   clean block's amplitude spectrum through its diagonal (HH) wavelet detail
   at two levels, via singular-value fusion. The clean phase is kept.
2. ``constrain_morphology``: a pixel-space wavelet split keeps only the
   horizontal (LH) or vertical (HL) detail of the poisoned block; every other
   subband reverts to the clean one.
3. ``embed_block``: the plane is quantised and written back into one channel
   of the image.

``poison_sample`` strings these together with the coefficient tuner.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, ShapeMismatch, SpecOutOfBounds
from .image_io import PoisonRecord, check_image, load_image
from .layout import HORIZONTAL, ORIENTATIONS, VERTICAL, BlockSpec, GridConfig, target_to_spec
from .metrics import psnr
from .spectral import Spectrum, dwt2, fft2, idwt2, ifft2, recompose, svd
from .tuner import TunerConfig, tune_K


@dataclass(frozen=True)
class Stages:
    """Which pipeline components are active.

    ``fixed_k`` is used whenever ``dynamic_tuning`` is off.
    """

    dynamic_tuning: bool = True
    morphology: bool = True
    svd_fusion: bool = True
    dwt_extraction: bool = True
    fixed_k: float | None = None
    clamp_amplitude: bool = True

    def __post_init__(self):
        if not self.dynamic_tuning and self.fixed_k is None:
            raise ConfigError("a fixed coefficient is required when dynamic tuning is off")
        if self.fixed_k is not None and self.fixed_k < 0:
            raise ConfigError("coefficient must be non-negative")


FULL = Stages()


# ------------------------------------------------------------------- triggers

def make_trigger(side: int, seed: int = 0) -> np.ndarray:
    """Seeded uniform-noise texture with integer levels in [0, 255]."""
    rng = np.random.default_rng(seed)
    return rng.integers(0, 256, size=(side, side)).astype(np.float64)


def load_trigger(path, side: int) -> np.ndarray:
    """Read an ``side x side`` trigger image; colour input is averaged to gray."""
    img = load_image(path)
    if img.shape[:2] != (side, side):
        raise ShapeMismatch(f"trigger is {img.shape[:2]}, blocks are {side}x{side}")
    return img.astype(np.float64).mean(axis=2)


# ------------------------------------------------------------------ injection

def _check_pair(a, b, what):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"{what}: shapes {a.shape} and {b.shape} must be equal and square")
    return a, b


def _fuse(hh_clean, hh_trigger, K, use_svd):
    hh_add = hh_clean + K * hh_trigger
    if not use_svd:
        return hh_add
    U_c, _, Vt_c = svd(hh_clean)
    return recompose(U_c, svd(hh_add).D, Vt_c)


def poisoned_amplitude(amp_clean, amp_trigger, K, *, svd_fusion=True, dwt_extraction=True) -> np.ndarray:
    """Mix the trigger amplitude into the clean amplitude (before clamping)."""
    if not dwt_extraction:
        return amp_clean + K * amp_trigger
    pc = dwt2(amp_clean)
    pt = dwt2(amp_trigger)
    hh1 = _fuse(pc.level1.HH, pt.level1.HH, K, svd_fusion)
    hh2 = _fuse(pc.level2.HH, pt.level2.HH, K, svd_fusion)
    return idwt2(pc.replace(1, HH=hh1).replace(2, HH=hh2))


def inject_frequency(clean_plane, trigger, K: float, *, clamp_amplitude=True, svd_fusion=True,
                     dwt_extraction=True) -> np.ndarray:
    """Poison one ``l0 x l0`` plane in the amplitude spectrum.

    Returns an unquantised real plane. With the default flags this is the full
    FFT -> DWT -> SVD-fusion -> IDWT -> IFFT chain; ``svd_fusion=False``
    writes the mixed HH detail directly and ``dwt_extraction=False`` adds the
    scaled trigger amplitude to the whole clean amplitude.
    """
    clean, trig = _check_pair(clean_plane, trigger, "inject_frequency")
    if K < 0:
        raise ConfigError(f"coefficient must be non-negative, got {K}")
    spec_c = fft2(clean)
    amp_t = fft2(trig).amplitude
    amp_p = poisoned_amplitude(spec_c.amplitude, amp_t, K, svd_fusion=svd_fusion, dwt_extraction=dwt_extraction)
    if clamp_amplitude:
        amp_p = np.maximum(amp_p, 0.0)
    return ifft2(Spectrum(amp_p, spec_c.phase))


def constrain_morphology(poisoned_block, clean_block, orientation: str) -> np.ndarray:
    """Keep only horizontal (LH) or vertical (HL) poisoned detail, both levels."""
    poisoned, clean = _check_pair(poisoned_block, clean_block, "constrain_morphology")
    if orientation not in ORIENTATIONS:
        raise ConfigError(f"unknown orientation {orientation!r}")
    pp = dwt2(poisoned)
    pc = dwt2(clean)
    band = "LH" if orientation == HORIZONTAL else "HL"
    out = pc.replace(1, **{band: getattr(pp.level1, band)}).replace(2, **{band: getattr(pp.level2, band)})
    return idwt2(out)


def quantize(plane) -> np.ndarray:
    """Clamp to [0, 255] and round half to even."""
    return np.rint(np.clip(plane, 0.0, 255.0)).astype(np.uint8)


def embed_block(image: np.ndarray, spec: BlockSpec, new_plane) -> np.ndarray:
    """Return a copy of ``image`` with ``new_plane`` written into the block the spec describes."""
    check_image(image)
    h, w, c = image.shape
    r0, c0 = spec.origin
    plane = np.asarray(new_plane, dtype=np.float64)
    if plane.shape != (spec.side, spec.side):
        raise ShapeMismatch(f"plane {plane.shape} does not match block side {spec.side}")
    if r0 < 0 or c0 < 0 or r0 + spec.side > h or c0 + spec.side > w:
        raise SpecOutOfBounds(f"block at {spec.origin} side {spec.side} exceeds {h}x{w} image")
    out = image.copy()
    rows, cols = spec.slices()
    out[rows, cols, spec.plane_index(c)] = quantize(plane)
    return out


def extract_block(image: np.ndarray, spec: BlockSpec) -> np.ndarray:
    rows, cols = spec.slices()
    return image[rows, cols, spec.plane_index(image.shape[2])].astype(np.float64)


# ------------------------------------------------------------------ per sample

def block_transform(clean_block, trigger, K, orientation, stages: Stages = FULL) -> np.ndarray:
    """Poisoned (unquantised) block for a given coefficient."""
    poisoned = inject_frequency(
        clean_block, trigger, K,
        clamp_amplitude=stages.clamp_amplitude,
        svd_fusion=stages.svd_fusion,
        dwt_extraction=stages.dwt_extraction,
    )
    if stages.morphology:
        poisoned = constrain_morphology(poisoned, clean_block, orientation)
    return poisoned


def poison_with_spec(image: np.ndarray, spec: BlockSpec, trigger, tune: TunerConfig = TunerConfig(),
                     stages: Stages = FULL, source_id: str = "") -> tuple[np.ndarray, PoisonRecord]:
    """Poison ``image`` at an explicit block spec."""
    check_image(image)
    trigger = np.asarray(trigger, dtype=np.float64)
    clean_block = extract_block(image, spec)
    cache: dict[float, np.ndarray] = {}

    def render(K: float) -> np.ndarray:
        if K not in cache:
            cache[K] = embed_block(image, spec, block_transform(clean_block, trigger, K, spec.orientation, stages))
        return cache[K]

    if stages.dynamic_tuning:
        K, value, iterations = tune_K(image, render, tune)
    else:
        K, iterations = float(stages.fixed_k), 0
        value = psnr(image, render(K))
    record = PoisonRecord(
        source_id=source_id,
        target_class=spec.target_class,
        block_index=spec.block_index,
        channel=spec.channel,
        orientation=spec.orientation,
        coefficient=float(K),
        psnr_db=float(value),
        tuner_iterations=int(iterations),
    )
    return render(K), record


def poison_sample(image: np.ndarray, t: int, trigger, grid: GridConfig, tune: TunerConfig = TunerConfig(),
                  stages: Stages = FULL, source_id: str = "") -> tuple[np.ndarray, PoisonRecord]:
    """Poison ``image`` towards 1-based target class ``t``."""
    check_image(image)
    h, w, c = image.shape
    if (grid.image_height, grid.image_width) != (h, w):
        raise ShapeMismatch(f"grid is {grid.image_height}x{grid.image_width}, image is {h}x{w}")
    if grid.channels != c:
        grid = replace(grid, channels=c)
    return poison_with_spec(image, target_to_spec(t, grid), trigger, tune, stages, source_id)


__all__ = [
    "FULL", "HORIZONTAL", "VERTICAL", "Stages", "block_transform", "constrain_morphology", "embed_block",
    "extract_block", "inject_frequency", "load_trigger", "make_trigger", "poison_sample", "poison_with_spec",
    "poisoned_amplitude", "quantize",
]
