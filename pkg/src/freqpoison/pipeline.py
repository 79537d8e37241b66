"""Dataset-level poisoning: plan, draw sources, poison every target, write out.

Output trees mirror the input (one directory per class). Each poisoned copy
lands in its *target* class directory as ``<source class>_<stem>_p<t><suffix>``;
all clean files are copied through untouched. ``manifest.json`` (one record
per poisoned file) and ``run.json`` (the effective configuration) sit at the
root.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path, PurePosixPath

import numpy as np

from .errors import ConfigError, InvalidStage, PlanInfeasible
from .image_io import (
    LabeledDataset,
    PoisonRecord,
    Sample,
    load_dataset,
    load_image,
    read_manifest,
    save_image,
    write_manifest,
)
from .injector import FULL, Stages, load_trigger, make_trigger, poison_sample
from .layout import GridConfig, block_grid, target_to_spec
from .tuner import TunerConfig

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger(__name__)

# coefficient used by each ablation step when tuning is switched off
ABLATION_K = {1: 2.5, 2: 0.25, 3: 0.24, 4: 0.05}


def run_ablation_stage(stage: int, fixed_k: float | None = None) -> Stages:
    """Stage toggles for ablation step ``stage`` (0 = full pipeline).

    Steps are cumulative: step 1 drops coefficient tuning, step 2 also drops
    the morphology constraint, step 3 also replaces singular-value fusion by
    writing the mixed HH detail directly, and step 4 also skips the wavelet
    split and adds the scaled trigger amplitude to the whole clean amplitude.
    """
    if stage == 0:
        return FULL if fixed_k is None else replace(FULL, fixed_k=fixed_k)
    if stage not in ABLATION_K:
        raise InvalidStage(f"stage must be 0..4, got {stage}")
    return Stages(
        dynamic_tuning=False,
        morphology=stage < 2,
        svd_fusion=stage < 3,
        dwt_extraction=stage < 4,
        fixed_k=ABLATION_K[stage] if fixed_k is None else fixed_k,
    )


@dataclass(frozen=True)
class PoisonPlan:
    rate: float
    seed: int
    stages: Stages = FULL

    def __post_init__(self):
        if not 0 <= self.rate <= 1:
            raise ConfigError(f"poison rate must lie in [0, 1], got {self.rate}")

    def counts(self, dataset_size: int, num_classes: int) -> tuple[int, int]:
        """``(N_p, per_class)`` for a dataset of the given size."""
        n_p = math.floor(self.rate * dataset_size + 1e-9)
        return n_p, n_p // num_classes


def poisoned_relpath(source_id: str, t: int, class_names) -> str:
    """Output path of a poisoned copy; the source class keeps equal stems apart."""
    p = PurePosixPath(source_id)
    return f"{class_names[t - 1]}/{p.parent.name}_{p.stem}_p{t}{p.suffix}"


def draw_sources(ds: LabeledDataset, plan: PoisonPlan) -> list[tuple[int, int]]:
    """``(target, sample index)`` pairs, target-major.

    Each target draws without replacement from samples outside its own class,
    with its own seeded stream so draws do not depend on other targets.
    """
    M = len(ds.class_names)
    n_p, per_class = plan.counts(len(ds), M)
    if n_p > len(ds):
        raise PlanInfeasible(f"{n_p} poisoned samples requested from {len(ds)} images")
    labels = np.array([s.label for s in ds.samples])
    pairs = []
    for t in range(1, M + 1):
        pool = np.flatnonzero(labels != t - 1)
        if per_class > len(pool):
            raise PlanInfeasible(f"target {t} needs {per_class} sources, only {len(pool)} outside its class")
        rng = np.random.default_rng([plan.seed, t])
        pairs.extend((t, int(i)) for i in rng.choice(pool, size=per_class, replace=False))
    return pairs


def _poison_task(args):
    image, t, trigger, grid, tune, stages, source_id = args
    return poison_sample(image, t, trigger, grid, tune, stages, source_id)


def poison_dataset(ds: LabeledDataset, plan: PoisonPlan, grid: GridConfig, trigger,
                   tune: TunerConfig = TunerConfig(), jobs: int = 1) -> tuple[LabeledDataset, list[PoisonRecord]]:
    """Return the clean samples followed by ``M * floor(N_p / M)`` poisoned copies.

    ``grid.num_classes`` must equal the dataset's class count. The manifest
    follows sample order whatever ``jobs`` is.
    """
    M = len(ds.class_names)
    h, w, c = ds.image_shape
    if grid.num_classes != M:
        raise ConfigError(f"grid configured for {grid.num_classes} classes, dataset has {M}")
    if (grid.image_height, grid.image_width) != (h, w):
        raise ConfigError(f"grid is {grid.image_height}x{grid.image_width}, images are {h}x{w}")
    grid = replace(grid, channels=c)
    block_grid(grid)  # capacity check before any work
    pairs = draw_sources(ds, plan)
    tasks = [(ds.samples[i].image, t, trigger, grid, tune, plan.stages, ds.samples[i].source_id) for t, i in pairs]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_poison_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_poison_task(task) for task in tasks]
    samples = list(ds.samples)
    records = []
    for (t, i), (img, rec) in zip(pairs, results):
        samples.append(Sample(img, t - 1, poisoned_relpath(ds.samples[i].source_id, t, ds.class_names)))
        records.append(rec)
    log.info("poisoned %d samples (%d per class)", len(records), len(records) // M if M else 0)
    return LabeledDataset(samples, list(ds.class_names), ds.root), records


def write_dataset(ds: LabeledDataset, out_dir, records=None) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in ds.class_names:
        (out / name).mkdir(exist_ok=True)
    for s in ds.samples:
        save_image(s.image, out / s.source_id)
    if records is not None:
        write_manifest(records, out / "manifest.json")


# --------------------------------------------------------------- configuration

@dataclass
class RunConfig:
    block_side: int = 8
    tuner: TunerConfig = field(default_factory=TunerConfig)
    rate: float = 0.03
    seed: int | None = None
    stage: int = 0
    fixed_k: float | None = None
    trigger_path: str | None = None
    trigger_seed: int = 0
    jobs: int = 1

    def stages(self) -> Stages:
        return run_ablation_stage(self.stage, self.fixed_k)

    def plan(self) -> PoisonPlan:
        if self.seed is None:
            raise ConfigError("a seed is required ([plan] seed or --seed)")
        return PoisonPlan(self.rate, self.seed, self.stages())

    def trigger(self) -> np.ndarray:
        if self.trigger_path:
            return load_trigger(self.trigger_path, self.block_side)
        return make_trigger(self.block_side, self.trigger_seed)

    def to_json(self) -> dict:
        d = asdict(self)
        d["tuner"] = asdict(self.tuner)
        return d


_SECTIONS = {
    "grid": {"block_side": "block_side"},
    "plan": {"rate": "rate", "seed": "seed", "stage": "stage", "fixed_k": "fixed_k", "jobs": "jobs"},
    "trigger": {"path": "trigger_path", "seed": "trigger_seed"},
}
_TUNER_KEYS = {"p0": "p0", "p1": "p1", "k_min": "k_min", "k_max": "k_max", "max_iter": "max_iter"}


def load_config(path=None, **overrides) -> RunConfig:
    """Read a TOML run configuration; keyword overrides win over file values."""
    data = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    unknown = set(data) - set(_SECTIONS) - {"tuner", "ntk"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    kwargs = {}
    for section, keys in _SECTIONS.items():
        for key, value in data.get(section, {}).items():
            if key not in keys:
                raise ConfigError(f"unknown key [{section}] {key}")
            kwargs[keys[key]] = value
    tuner_kwargs = {}
    for key, value in data.get("tuner", {}).items():
        if key not in _TUNER_KEYS:
            raise ConfigError(f"unknown key [tuner] {key}")
        tuner_kwargs[_TUNER_KEYS[key]] = value
    for key, value in overrides.items():
        if value is None:
            continue
        if key in _TUNER_KEYS:
            tuner_kwargs[key] = value
        else:
            kwargs[key] = value
    try:
        return RunConfig(tuner=TunerConfig(**tuner_kwargs), **kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def run_poison(in_dir, out_dir, cfg: RunConfig) -> list[PoisonRecord]:
    """Load, poison and write a dataset tree; the whole ``poison`` command."""
    ds = load_dataset(in_dir)
    h, w, _ = ds.image_shape
    grid = GridConfig(h, w, cfg.block_side, len(ds.class_names))
    poisoned, records = poison_dataset(ds, cfg.plan(), grid, cfg.trigger(), cfg.tuner, jobs=cfg.jobs)
    write_dataset(poisoned, out_dir, records)
    run_info = cfg.to_json()
    run_info.pop("jobs")
    Path(out_dir, "run.json").write_text(json.dumps(run_info, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return records


# ---------------------------------------------------------------------- verify

def verify_output(in_dir, out_dir) -> list[tuple[str, bool, str]]:
    """Check a poisoned tree against its source tree and manifest.

    Returns ``(check, passed, detail)`` triples covering clean passthrough,
    labels, per-class counts and pixel locality.
    """
    src = load_dataset(in_dir)
    out_root = Path(out_dir)
    records = read_manifest(out_root / "manifest.json")
    run = json.loads((out_root / "run.json").read_text(encoding="utf-8"))
    names = src.class_names
    h, w, c = src.image_shape
    grid = GridConfig(h, w, run["block_side"], len(names), channels=c)
    by_id = {s.source_id: s for s in src.samples}
    results = []

    bad = [s.source_id for s in src.samples
           if not (out_root / s.source_id).is_file() or not np.array_equal(load_image(out_root / s.source_id), s.image)]
    results.append(("clean passthrough", not bad, f"{len(src) - len(bad)}/{len(src)} identical"))

    counts = np.bincount([r.target_class for r in records], minlength=len(names) + 1)[1:]
    even = len(set(counts.tolist())) <= 1
    results.append(("per-class counts", even, f"counts {counts.tolist()}"))

    label_bad, local_bad = [], []
    for r in records:
        rel = poisoned_relpath(r.source_id, r.target_class, names)
        path = out_root / rel
        if not path.is_file() or by_id.get(r.source_id) is None or by_id[r.source_id].label == r.target_class - 1:
            label_bad.append(rel)
            continue
        spec = target_to_spec(r.target_class, grid)
        if (spec.block_index, spec.channel, spec.orientation) != (r.block_index, r.channel, r.orientation):
            local_bad.append(rel)
            continue
        diff = load_image(path).astype(int) != by_id[r.source_id].image.astype(int)
        rows, cols = spec.slices()
        diff[rows, cols, spec.plane_index(c)] = False
        if diff.any():
            local_bad.append(rel)
    results.append(("labels", not label_bad, f"{len(records) - len(label_bad)}/{len(records)} in target class dir"))
    results.append(("locality", not local_bad, f"{len(records) - len(local_bad)}/{len(records)} confined to block"))
    return results


def tree_digest(root) -> dict[str, str]:
    """SHA-256 of every file under ``root`` keyed by relative path."""
    root = Path(root)
    return {
        str(p.relative_to(root)).replace(os.sep, "/"): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*")) if p.is_file()
    }
