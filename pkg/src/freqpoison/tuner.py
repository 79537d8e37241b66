"""PSNR-driven bisection for the injection coefficient."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConfigError
from .metrics import psnr


@dataclass(frozen=True)
class TunerConfig:
    p0: float = 40.0
    p1: float = 42.0
    k_min: float = 0.1
    k_max: float = 40.0
    max_iter: int = 20

    def __post_init__(self):
        if not self.p0 < self.p1:
            raise ConfigError(f"need p0 < p1, got ({self.p0}, {self.p1})")
        if not 0 < self.k_min < self.k_max:
            raise ConfigError(f"need 0 < k_min < k_max, got ({self.k_min}, {self.k_max})")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be >= 1")

    def in_band(self, value: float) -> bool:
        return self.p0 < value < self.p1


class TuneResult(NamedTuple):
    coefficient: float
    psnr_db: float
    iterations: int


def tune_K(clean: np.ndarray, render: Callable[[float], np.ndarray], cfg: TunerConfig = TunerConfig(),
           metric: Callable = psnr) -> TuneResult:
    """Pick K so that ``metric(clean, render(K))`` lands in ``(p0, p1)``.

    The first probe is at ``k_min``. If that is already in band, or already
    too visible, ``k_min`` is kept so the trigger never drops below its
    effectiveness floor. Otherwise the search jumps to ``k_max`` and bisects.
    A PSNR of exactly ``p0`` counts as too visible. When ``max_iter`` probes
    are used up, the pending midpoint is returned (and rendered once more so
    the reported PSNR matches it).

    ``metric`` exists for testing against synthetic PSNR curves.
    """
    left, right = cfg.k_min, cfg.k_max
    K = cfg.k_min
    first = True
    for n in range(cfg.max_iter):
        value = metric(clean, render(K))
        if first:
            first = False
            if value <= cfg.p0 or cfg.in_band(value):
                return TuneResult(K, value, n + 1)
            K = cfg.k_max
            continue
        if cfg.in_band(value):
            return TuneResult(K, value, n + 1)
        if value <= cfg.p0:
            right = K
        else:
            left = K
        K = (left + right) / 2
    return TuneResult(K, metric(clean, render(K)), cfg.max_iter)
