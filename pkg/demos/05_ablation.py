"""Switch pipeline components off one at a time and watch image quality."""

import numpy as np

from freqpoison import GridConfig, make_trigger, poison_sample, psnr, ssim
from freqpoison.pipeline import run_ablation_stage
from freqpoison.synth import texture_corpus

grid = GridConfig(32, 32, 8, num_classes=12)
trigger = make_trigger(8)
images = texture_corpus(20, seed=5)
names = ["full pipeline", "fixed K", "no morphology", "no SVD fusion", "no wavelet split"]

for stage, name in enumerate(names):
    stages = run_ablation_stage(stage)
    scores = [(psnr(img, out), ssim(img, out))
              for img in images for t in range(1, 13)
              for out, _ in [poison_sample(img, t, trigger, grid, stages=stages)]]
    p, s = np.mean(scores, axis=0)
    k = "tuned" if stages.dynamic_tuning else f"K={stages.fixed_k}"
    print(f"stage {stage} {name:<17} {k:<8} PSNR {p:6.2f}  SSIM {s:.4f}")
