"""Build a small class-per-directory dataset, poison it through the CLI, then verify it.

Usage: python demos/03_poison_a_dataset.py [WORKDIR]
"""

import sys
import tempfile
from pathlib import Path

from freqpoison.cli import main
from freqpoison.image_io import read_manifest, save_image
from freqpoison.synth import texture_corpus

work = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="freqpoison-"))
src = work / "clean"
for i, img in enumerate(texture_corpus(200, seed=1)):
    folder = src / f"class{i % 10}"
    folder.mkdir(parents=True, exist_ok=True)
    save_image(img, folder / f"{i:04d}.png")

config = work / "run.toml"
config.write_text("[grid]\nblock_side = 8\n\n[plan]\nrate = 0.1\nseed = 42\n\n[trigger]\nseed = 0\n")

out = work / "poisoned"
main(["poison", "--in", str(src), "--out", str(out), "--config", str(config), "--jobs", "2"])
records = read_manifest(out / "manifest.json")
print(f"first record: {records[0]}")
print(f"coefficients span {min(r.coefficient for r in records):.3f}..{max(r.coefficient for r in records):.3f}")
main(["verify", "--in", str(src), "--out", str(out)])
print(f"output tree: {out}")
