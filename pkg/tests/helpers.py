import numpy as np

from freqpoison.image_io import LabeledDataset, Sample, save_image
from freqpoison.synth import texture_corpus


def texture_dataset(num_classes=4, per_class=5, size=32, seed=0):
    images = texture_corpus(num_classes * per_class, size=size, seed=seed)
    names = [f"class{c:02d}" for c in range(num_classes)]
    samples = [
        Sample(images[c * per_class + k], c, f"{names[c]}/img{k:03d}.png")
        for c in range(num_classes) for k in range(per_class)
    ]
    return LabeledDataset(samples, names)


def write_tree(ds, root):
    for s in ds.samples:
        (root / s.source_id).parent.mkdir(parents=True, exist_ok=True)
        save_image(s.image, root / s.source_id)
    return root


CONFIG = """\
[grid]
block_side = 8

[tuner]
p0 = 40.0
p1 = 42.0

[plan]
rate = 0.4
seed = 11

[trigger]
seed = 3
"""


# one line per acceptance criterion, printed at the end of the pytest run
ACCEPTANCE_LINES = []


def report(criterion, ok, detail):
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok
