"""Command-line entry point: ``freqpoison <subcommand>``.

Exit codes: 0 success, 2 configuration error, 3 data error (and 1 when
``verify`` finds a broken contract).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from .errors import ConfigError, DataError
from .image_io import load_image, save_image, write_manifest
from .injector import load_trigger, make_trigger, poison_sample
from .layout import GridConfig, all_specs, validate_spacing
from .metrics import psnr, ssim
from .ntk import KernelSimConfig, spatial_sensitivity_experiment
from .pipeline import load_config, run_poison, tomllib, verify_output
from .tuner import TunerConfig

log = logging.getLogger("freqpoison")


def _cmd_poison(args) -> int:
    cfg = load_config(args.config, seed=args.seed, stage=args.stage, jobs=args.jobs)
    records = run_poison(args.in_dir, args.out_dir, cfg)
    print(f"wrote {len(records)} poisoned samples to {args.out_dir}")
    return 0


def _cmd_layout(args) -> int:
    grid = GridConfig(args.height, args.width, args.block_side, args.classes or 1, channels=args.channels)
    if args.classes is None:
        grid = GridConfig(args.height, args.width, args.block_side, grid.capacity, channels=args.channels)
    validate_spacing(grid)
    print("target\tblock\tchannel\trow\tcol\torientation")
    for s in all_specs(grid):
        print(f"{s.target_class}\t{s.block_index}\t{s.channel_name}\t{s.origin[0]}\t{s.origin[1]}\t{s.orientation}")
    return 0


def _cmd_inject(args) -> int:
    image = load_image(args.image)
    h, w, c = image.shape
    probe = GridConfig(h, w, args.block_side, 1, channels=c)
    grid = GridConfig(h, w, args.block_side, args.classes or probe.capacity, channels=c)
    trigger = load_trigger(args.trigger, args.block_side) if args.trigger else make_trigger(args.block_side, args.seed)
    poisoned, record = poison_sample(image, args.target, trigger, grid, TunerConfig(), source_id=Path(args.image).name)
    save_image(poisoned, args.out)
    manifest = args.manifest or str(Path(args.out).with_suffix(".manifest.json"))
    write_manifest([record], manifest)
    print(f"K={record.coefficient:.6g} psnr={record.psnr_db:.4f} block={record.block_index} "
          f"channel={record.channel} orientation={record.orientation}")
    return 0


def _cmd_metrics(args) -> int:
    a, b = load_image(args.a), load_image(args.b)
    print(f"psnr={psnr(a, b):.4f} ssim={ssim(a, b):.6f}")
    return 0


def _ntk_config(path, seed) -> KernelSimConfig:
    section = {}
    if path:
        try:
            with open(path, "rb") as fh:
                section = tomllib.load(fh).get("ntk", {})
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    known = {f.name for f in fields(KernelSimConfig)} - {"tuner"}
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"unknown [ntk] keys: {sorted(unknown)}")
    if seed is not None:
        section["seed"] = seed
    return KernelSimConfig(**section)


def _cmd_ntk_sim(args) -> int:
    report = spatial_sensitivity_experiment(_ntk_config(args.config, args.seed))
    Path(args.out).write_text(json.dumps(report.to_json(), indent=2) + "\n", encoding="utf-8")
    print(f"phi_same={report.phi_same:.4f} phi_shifted={report.phi_shifted:.4f}")
    return 0


def _cmd_verify(args) -> int:
    results = verify_output(args.in_dir, args.out_dir)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}\t{name}\t{detail}")
    return 0 if all(ok for _, ok, _ in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="freqpoison", description="Frequency-domain multi-target poisoning toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("poison", help="poison a class-per-directory dataset")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", dest="out_dir", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--jobs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--stage", type=int, choices=range(5))
    p.set_defaults(func=_cmd_poison)

    p = sub.add_parser("layout", help="print the target to block table as TSV")
    p.add_argument("--height", type=int, default=32)
    p.add_argument("--width", type=int, default=32)
    p.add_argument("--block-side", type=int, default=8)
    p.add_argument("--classes", type=int, help="defaults to full capacity")
    p.add_argument("--channels", type=int, default=3, choices=(1, 3))
    p.set_defaults(func=_cmd_layout)

    p = sub.add_parser("inject", help="poison one image toward one target")
    p.add_argument("--image", required=True)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--trigger")
    p.add_argument("--seed", type=int, default=0, help="trigger seed when no --trigger is given")
    p.add_argument("--block-side", type=int, default=8)
    p.add_argument("--classes", type=int, help="defaults to full capacity")
    p.add_argument("--manifest", help="defaults to <out>.manifest.json")
    p.set_defaults(func=_cmd_inject)

    p = sub.add_parser("metrics", help="PSNR and SSIM between two images")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("ntk-sim", help="kernel-regression spatial sensitivity experiment")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ntk_sim)

    p = sub.add_parser("verify", help="check a poisoned tree against its source")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", dest="out_dir", required=True)
    p.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
