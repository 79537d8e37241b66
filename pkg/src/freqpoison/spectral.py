"""Block-scale transforms: centred 2-D DFT, two-level Haar DWT, small SVD.

All functions take and return ``float64`` arrays and never mutate inputs.

Haar subband naming follows the usual watermarking convention, where the
first letter is the filter applied along a row (horizontal direction) and
the second the filter applied along a column::

    LL  approximation
    HL  high-pass across columns  -> vertical edges
    LH  high-pass across rows     -> horizontal edges
    HH  diagonal detail
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionTooSmall, NonFiniteInput, OddDimension, ShapeMismatch

log = logging.getLogger(__name__)


class Spectrum(NamedTuple):
    amplitude: np.ndarray  # centre-shifted, DC at (n // 2, n // 2)
    phase: np.ndarray  # centre-shifted, radians


class Subbands(NamedTuple):
    LL: np.ndarray
    HL: np.ndarray
    LH: np.ndarray
    HH: np.ndarray


@dataclass(frozen=True)
class SubbandPyramid:
    """Two-level decomposition; ``level2`` analyses ``level1.LL``."""

    level1: Subbands
    level2: Subbands

    def replace(self, level: int, **bands) -> "SubbandPyramid":
        if level == 1:
            return SubbandPyramid(self.level1._replace(**bands), self.level2)
        if level == 2:
            return SubbandPyramid(self.level1, self.level2._replace(**bands))
        raise ValueError(f"level must be 1 or 2, got {level}")

    def coefficients(self):
        """Every coefficient that :func:`idwt2` actually consumes."""
        return (*self.level2, self.level1.HL, self.level1.LH, self.level1.HH)


class SvdTriple(NamedTuple):
    U: np.ndarray
    D: np.ndarray
    Vt: np.ndarray


def _square(plane, name="plane") -> np.ndarray:
    arr = np.asarray(plane, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeMismatch(f"{name} must be square 2-D, got shape {arr.shape}")
    return arr


# ------------------------------------------------------------------------ DFT

def fft2(plane) -> Spectrum:
    """Amplitude and phase of the 2-D DFT, both centre-shifted."""
    x = _square(plane)
    if x.shape[0] < 4:
        raise DimensionTooSmall(f"DFT needs n >= 4, got {x.shape[0]}")
    F = np.fft.fftshift(np.fft.fft2(x))
    return Spectrum(np.abs(F), np.angle(F))


def ifft2(spectrum: Spectrum, *, return_residual: bool = False):
    """Recombine a centred amplitude/phase pair and invert the DFT.

    The real part is returned. Spectra whose amplitude was edited need not be
    Hermitian, so the largest discarded imaginary component is logged at
    DEBUG level and optionally returned as a second value.
    """
    amp = _square(spectrum.amplitude, "amplitude")
    phase = _square(spectrum.phase, "phase")
    if amp.shape != phase.shape:
        raise ShapeMismatch(f"amplitude {amp.shape} vs phase {phase.shape}")
    F = np.fft.ifftshift(amp * np.exp(1j * phase))
    z = np.fft.ifft2(F)
    residual = float(np.max(np.abs(z.imag))) if z.size else 0.0
    log.debug("ifft2 imaginary residual %.3e", residual)
    if return_residual:
        return z.real.copy(), residual
    return z.real.copy()


# ------------------------------------------------------------------------ DWT

def haar_analysis(x: np.ndarray) -> Subbands:
    """One level of the orthonormal 2-D Haar transform."""
    if x.shape[0] % 2 or x.shape[1] % 2:
        raise OddDimension(f"Haar step needs even sides, got {x.shape}")
    a = x[0::2, 0::2]
    b = x[0::2, 1::2]
    c = x[1::2, 0::2]
    d = x[1::2, 1::2]
    return Subbands(
        LL=(a + b + c + d) / 2,
        HL=(a - b + c - d) / 2,
        LH=(a + b - c - d) / 2,
        HH=(a - b - c + d) / 2,
    )


def haar_synthesis(bands: Subbands) -> np.ndarray:
    """Invert :func:`haar_analysis`."""
    LL, HL, LH, HH = (np.asarray(b, dtype=np.float64) for b in bands)
    if not (LL.shape == HL.shape == LH.shape == HH.shape) or LL.ndim != 2:
        raise ShapeMismatch(f"subband shapes disagree: {[b.shape for b in (LL, HL, LH, HH)]}")
    h, w = LL.shape
    out = np.empty((2 * h, 2 * w))
    out[0::2, 0::2] = (LL + HL + LH + HH) / 2
    out[0::2, 1::2] = (LL - HL + LH - HH) / 2
    out[1::2, 0::2] = (LL + HL - LH - HH) / 2
    out[1::2, 1::2] = (LL - HL - LH + HH) / 2
    return out


def dwt2(plane, levels: int = 2) -> SubbandPyramid:
    if levels != 2:
        raise ValueError("only the two-level decomposition is supported")
    x = _square(plane)
    n = x.shape[0]
    if n < 4 or n % 4:
        raise OddDimension(f"two-level Haar needs n divisible by 4, got {n}")
    level1 = haar_analysis(x)
    return SubbandPyramid(level1, haar_analysis(level1.LL))


def idwt2(pyramid: SubbandPyramid) -> np.ndarray:
    """Rebuild the plane bottom-up.

    ``level1.LL`` is not read: the approximation is regenerated from
    ``level2``, so edits to level-2 subbands propagate.
    """
    ll1 = haar_synthesis(pyramid.level2)
    l1 = pyramid.level1
    if ll1.shape != np.shape(l1.HL):
        raise ShapeMismatch(f"level-2 rebuilds {ll1.shape}, level-1 details are {np.shape(l1.HL)}")
    return haar_synthesis(Subbands(ll1, l1.HL, l1.LH, l1.HH))


# ------------------------------------------------------------------------ SVD

def svd(matrix) -> SvdTriple:
    """SVD with a deterministic sign: each left singular vector's
    largest-magnitude entry is made non-negative."""
    A = np.asarray(matrix, dtype=np.float64)
    if A.ndim != 2:
        raise ShapeMismatch(f"svd needs a 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFiniteInput("svd input contains NaN or inf")
    U, D, Vt = np.linalg.svd(A)
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.where(U[idx, np.arange(U.shape[1])] < 0, -1.0, 1.0)
    U = U * signs
    Vt = Vt * signs[:, None]
    return SvdTriple(U, D, Vt)


def recompose(U, D_new, Vt) -> np.ndarray:
    U = np.asarray(U, dtype=np.float64)
    D_new = np.asarray(D_new, dtype=np.float64)
    Vt = np.asarray(Vt, dtype=np.float64)
    if U.ndim != 2 or Vt.ndim != 2 or D_new.ndim != 1:
        raise ShapeMismatch("recompose expects U, Vt matrices and a D vector")
    k = D_new.shape[0]
    if U.shape[1] != k or Vt.shape[0] != k:
        raise ShapeMismatch(f"U {U.shape}, D ({k},), Vt {Vt.shape} do not conform")
    if not np.all(np.isfinite(D_new)):
        raise NonFiniteInput("singular values must be finite")
    return (U * D_new) @ Vt
