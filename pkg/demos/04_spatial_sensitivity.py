"""Kernel-regression view of why a trigger only works at its own block.

A one-hot RBF kernel regressor is trained on class-structured textures plus
copies poisoned at block m0. Test inputs carrying the trigger at m0 score
high for the target; the same trigger one block over does not.
"""

from freqpoison.ntk import KernelSimConfig, spatial_sensitivity_experiment, multi_target_kernel_asr

cfg = KernelSimConfig(seed=0)
r = spatial_sensitivity_experiment(cfg)
print(f"trigger at trained block : phi={r.phi_same:.3f}  (above 0.5 for {100 * r.asr_same:.0f}% of queries)")
print(f"trigger one block over   : phi={r.phi_shifted:.3f}  (above 0.5 for {100 * r.asr_shifted:.0f}% of queries)")
print(f"no trigger               : phi={r.phi_clean:.3f}")

patch = spatial_sensitivity_experiment(KernelSimConfig(seed=0, trigger="patch"))
print(f"visible patch, shifted   : phi={patch.phi_shifted:.3g}")

print("three targets at once, argmax success:", multi_target_kernel_asr())
