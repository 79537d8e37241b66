"""RBF kernel-regression stand-in for a trained classifier.

A backdoored network is modelled as one-hot kernel regression over the
poisoned training set::

    phi_c(x) = (sum_{benign i, y_i = c} k(x, x_i) + sum_{poison j, t_j = c} k(x, x_j'))
               / (sum_i k(x, x_i) + sum_j k(x, x_j'))

with ``k(x, y) = exp(-2 * gamma * ||x - y||**2)``. The simulator builds
class-structured synthetic images, poisons them with the real injector at one
grid block, and measures ``phi_target`` for test inputs whose trigger sits at
the same block or at a disjoint one.

Classes are 0-based here; target classes in block specs stay 1-based, with
target ``t`` meaning class index ``t - 1``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import CapacityExceeded, ConfigError, DimensionMismatch, EmptyDataset, NonPositiveGamma
from .injector import make_trigger, poison_with_spec
from .layout import BlockSpec, GridConfig, spec_for_block, target_to_spec
from .synth import pink_noise
from .tuner import TunerConfig

GAMMA_PAIRS = 256


def rbf_kernel(x, y, gamma: float) -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise DimensionMismatch(f"vectors of length {x.size} and {y.size}")
    if not gamma > 0:
        raise NonPositiveGamma(f"gamma must be > 0, got {gamma}")
    return math.exp(-2.0 * gamma * float(np.sum((x - y) ** 2)))


def kernel_matrix(A, B, gamma: float) -> np.ndarray:
    if not gamma > 0:
        raise NonPositiveGamma(f"gamma must be > 0, got {gamma}")
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatch(f"feature dims {A.shape[1]} and {B.shape[1]}")
    return np.exp(-2.0 * gamma * cdist(A, B, "sqeuclidean"))


def median_gamma(X, rng: np.random.Generator, pairs: int = GAMMA_PAIRS) -> float:
    """``1 / (2 * median ||x - y||^2)`` over random distinct pairs."""
    X = np.asarray(X, dtype=np.float64)
    i = rng.integers(0, len(X), pairs)
    j = (i + rng.integers(1, len(X), pairs)) % len(X)
    med = float(np.median(np.sum((X[i] - X[j]) ** 2, axis=1)))
    return 1.0 / (2.0 * med)


def nn_median_gamma(X, rng: np.random.Generator, probes: int = GAMMA_PAIRS) -> float:
    """``1 / (2 * median nearest-neighbour ||x - y||^2)`` over a random probe set.

    Unlike the all-pairs median, this tracks the within-cluster scale, so the
    kernel does not flatten across well separated classes.
    """
    X = np.asarray(X, dtype=np.float64)
    idx = rng.choice(len(X), size=min(probes, len(X)), replace=False)
    D = cdist(X[idx], X, "sqeuclidean")
    D[np.arange(len(idx)), idx] = np.inf
    D[D == 0] = np.inf  # exact duplicates carry no scale information
    nn = D.min(axis=1)
    med = float(np.median(nn[np.isfinite(nn)]))
    return 1.0 / (2.0 * med)


GAMMA_POLICIES = {"median": median_gamma, "nn-median": nn_median_gamma}


@dataclass
class KernelDataset:
    benign_X: np.ndarray  # (N_b, D)
    benign_y: np.ndarray  # (N_b,) class indices
    poison_X: np.ndarray  # (N_p, D)
    poison_y: np.ndarray  # (N_p,) target class indices
    gamma: float
    num_classes: int
    target: int = 0

    def __post_init__(self):
        self.benign_X = np.atleast_2d(np.asarray(self.benign_X, dtype=np.float64))
        self.benign_y = np.asarray(self.benign_y, dtype=np.int64)
        dim = self.benign_X.shape[1]
        self.poison_X = np.asarray(self.poison_X, dtype=np.float64).reshape(-1, dim)
        self.poison_y = np.asarray(self.poison_y, dtype=np.int64).reshape(-1)
        if len(self.benign_X) + len(self.poison_X) == 0:
            raise EmptyDataset("kernel dataset has no training points")
        if not self.gamma > 0:
            raise NonPositiveGamma(f"gamma must be > 0, got {self.gamma}")

    def per_class_counts(self) -> np.ndarray:
        return np.bincount(self.benign_y, minlength=self.num_classes)


def _fsum_rows(K: np.ndarray) -> np.ndarray:
    return np.array([math.fsum(row) for row in K])


def class_scores(queries, ds: KernelDataset) -> np.ndarray:
    """One-hot kernel regression scores, shape ``(n_queries, num_classes)``.

    Sums are compensated (``math.fsum``) so results do not depend on the
    order training points are visited in.
    """
    Q = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    Kb = kernel_matrix(Q, ds.benign_X, ds.gamma) if len(ds.benign_X) else np.zeros((len(Q), 0))
    Kp = kernel_matrix(Q, ds.poison_X, ds.gamma) if len(ds.poison_X) else np.zeros((len(Q), 0))
    num = np.empty((len(Q), ds.num_classes))
    for c in range(ds.num_classes):
        num[:, c] = [math.fsum(b) + math.fsum(p) for b, p in zip(Kb[:, ds.benign_y == c], Kp[:, ds.poison_y == c])]
    den = _fsum_rows(np.hstack([Kb, Kp]))
    return num / den[:, None]


def ntk_predict(query, ds: KernelDataset, target: int | None = None):
    """Predicted probability of ``target`` (default ``ds.target``).

    A single query gives a float, a batch an array.
    """
    target = ds.target if target is None else target
    q = np.asarray(query, dtype=np.float64)
    scores = class_scores(q, ds)[:, target]
    return float(scores[0]) if q.ndim == 1 else scores


# ----------------------------------------------------------------- simulator

@dataclass(frozen=True)
class KernelSimConfig:
    """Synthetic world for the kernel simulator.

    Each class is a smooth random texture (``contrast`` sets its standard
    deviation in 8-bit levels); samples add i.i.d. Gaussian pixel noise of
    ``noise`` levels and are quantised to uint8.
    """

    image_side: int = 32
    block_side: int = 8
    num_classes: int = 10
    n_benign: int = 500
    n_poison: int | None = None  # defaults to n_benign
    gamma: str | float = "nn-median"
    seed: int = 0
    trials: int = 100
    target: int = 1  # 1-based
    noise: float = 1.5
    contrast: float = 40.0
    trigger: str = "frequency"  # or "patch": full-contrast checkerboard
    trigger_seed: int = 0
    tuner: TunerConfig = field(default_factory=TunerConfig)

    def __post_init__(self):
        if self.num_classes < 1 or self.n_benign < self.num_classes:
            raise ConfigError("need at least one benign sample per class")
        if self.trigger not in ("frequency", "patch"):
            raise ConfigError(f"unknown trigger kind {self.trigger!r}")
        if isinstance(self.gamma, str) and self.gamma not in GAMMA_POLICIES:
            raise ConfigError(f"unknown gamma policy {self.gamma!r}")
        if not isinstance(self.gamma, str) and not self.gamma > 0:
            raise NonPositiveGamma(f"gamma must be > 0, got {self.gamma}")

    @property
    def poison_count(self) -> int:
        return self.n_benign if self.n_poison is None else self.n_poison

    def grid(self, num_targets: int = 2) -> GridConfig:
        return GridConfig(self.image_side, self.image_side, self.block_side, num_targets, channels=1)


@dataclass(frozen=True)
class SensitivityReport:
    phi_same: float
    phi_shifted: float
    asr_same: float
    asr_shifted: float
    trial_count: int
    phi_clean: float
    gamma: float

    def to_json(self) -> dict:
        return asdict(self)


class _World:
    """Seeded class centres, a balanced benign set and a sample factory."""

    def __init__(self, cfg: KernelSimConfig):
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        side = cfg.image_side
        self.centres = [128.0 + cfg.contrast * pink_noise((side, side), self.rng) for _ in range(cfg.num_classes)]
        per_class = cfg.n_benign // cfg.num_classes
        self.benign = [(self.sample(c), c) for c in range(cfg.num_classes) for _ in range(per_class)]
        if cfg.trigger == "frequency":
            self.trigger = make_trigger(cfg.block_side, cfg.trigger_seed)
        else:
            self.trigger = np.where(np.indices((cfg.block_side,) * 2).sum(axis=0) % 2 == 0, 255.0, 0.0)

    def sample(self, c: int) -> np.ndarray:
        x = self.centres[c] + self.cfg.noise * self.rng.standard_normal(self.centres[c].shape)
        return np.rint(np.clip(x, 0, 255)).astype(np.uint8)[:, :, None]

    def apply(self, img: np.ndarray, spec: BlockSpec) -> np.ndarray:
        if self.cfg.trigger == "patch":
            out = img.copy()
            rows, cols = spec.slices()
            out[rows, cols, 0] = self.trigger.astype(np.uint8)
            return out
        return poison_with_spec(img, spec, self.trigger, self.cfg.tuner)[0]

    def non_target_cycle(self, target_idx: int, count: int) -> list[int]:
        others = [c for c in range(self.cfg.num_classes) if c != target_idx]
        if not others:
            raise ConfigError("need at least one non-target class")
        return [others[k % len(others)] for k in range(count)]


def _gamma(cfg: KernelSimConfig, X, rng) -> float:
    if isinstance(cfg.gamma, str):
        return GAMMA_POLICIES[cfg.gamma](X, rng)
    return float(cfg.gamma)


def _simulate(cfg: KernelSimConfig, specs: dict[int, BlockSpec], extra_specs: dict[int, BlockSpec] | None = None):
    """Build the poisoned kernel dataset and triggered test queries.

    Returns the dataset plus, per target, the query matrix at its own block
    and (if requested) at the alternative block, and the clean queries.
    """
    world = _World(cfg)
    per_target = cfg.poison_count // len(specs)
    poison_X, poison_y = [], []
    for t, spec in specs.items():
        for c in world.non_target_cycle(t - 1, per_target):
            poison_X.append(world.apply(world.sample(c), spec).ravel())
            poison_y.append(t - 1)
    queries = {}
    for t, spec in specs.items():
        same, shifted, clean = [], [], []
        for c in world.non_target_cycle(t - 1, cfg.trials):
            x = world.sample(c)
            clean.append(x.ravel())
            same.append(world.apply(x, spec).ravel())
            if extra_specs and t in extra_specs:
                shifted.append(world.apply(x, extra_specs[t]).ravel())
        queries[t] = tuple(np.array(q, dtype=np.float64) if q else None for q in (same, shifted, clean))
    benign_X = np.array([x.ravel() for x, _ in world.benign], dtype=np.float64)
    benign_y = np.array([c for _, c in world.benign])
    poison_X = np.array(poison_X, dtype=np.float64).reshape(-1, benign_X.shape[1])
    gamma = _gamma(cfg, np.vstack([benign_X, poison_X]), world.rng)
    ds = KernelDataset(benign_X, benign_y, poison_X, np.array(poison_y), gamma, cfg.num_classes,
                       target=next(iter(specs)) - 1)
    return ds, queries


def spatial_sensitivity_experiment(cfg: KernelSimConfig = KernelSimConfig()) -> SensitivityReport:
    """Target-class probability for triggers at the trained block vs a shifted one.

    The shifted block is the next block of the grid, with the same channel and
    morphology as the trained one, so only position changes.
    """
    grid = cfg.grid()
    if grid.blocks_per_channel < 2:
        raise CapacityExceeded(f"a {cfg.image_side}px image holds {grid.blocks_per_channel} block(s); need 2")
    m0 = spec_for_block((cfg.target - 1) % grid.blocks_per_channel, grid, target_class=cfg.target)
    m1 = spec_for_block((m0.block_index + 1) % grid.blocks_per_channel, grid, orientation=m0.orientation,
                        target_class=cfg.target)
    ds, queries = _simulate(cfg, {cfg.target: m0}, {cfg.target: m1})
    same, shifted, clean = queries[cfg.target]
    phi0 = class_scores(same, ds)[:, cfg.target - 1]
    phi1 = class_scores(shifted, ds)[:, cfg.target - 1]
    phic = class_scores(clean, ds)[:, cfg.target - 1]
    return SensitivityReport(
        phi_same=float(phi0.mean()),
        phi_shifted=float(phi1.mean()),
        asr_same=float(np.mean(phi0 > 0.5)),
        asr_shifted=float(np.mean(phi1 > 0.5)),
        trial_count=len(phi0),
        phi_clean=float(phic.mean()),
        gamma=ds.gamma,
    )


def multi_target_kernel_asr(cfg: KernelSimConfig = KernelSimConfig(num_classes=3, n_benign=300),
                            targets=None, specs: dict[int, BlockSpec] | None = None) -> dict[int, float]:
    """Per-target attack success rate with every target poisoned at once.

    Each target ``t`` gets ``n_poison // len(targets)`` poisoned samples at its
    own block. A query succeeds when ``t`` has the largest class score.
    ``specs`` overrides the layout, e.g. to put two targets in one block with
    different orientations.
    """
    targets = list(range(1, cfg.num_classes + 1)) if targets is None else list(targets)
    if specs is None:
        grid = cfg.grid(len(targets))
        if len(targets) > grid.blocks_per_channel:
            raise CapacityExceeded(f"{len(targets)} targets, {grid.blocks_per_channel} blocks in one channel")
        specs = {t: target_to_spec(k + 1, grid) for k, t in enumerate(targets)}
        specs = {t: BlockSpec(t, s.block_index, s.channel, s.origin, s.side, s.orientation) for t, s in specs.items()}
    ds, queries = _simulate(cfg, {t: specs[t] for t in targets})
    table = {}
    for t in targets:
        scores = class_scores(queries[t][0], ds)
        table[t] = float(np.mean(np.argmax(scores, axis=1) == t - 1))
    return table
