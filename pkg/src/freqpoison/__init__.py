"""Multi-target, frequency-domain backdoor poisoning of image datasets."""

from .errors import ConfigError, DataError, FreqPoisonError
from .image_io import LabeledDataset, PoisonRecord, Sample, load_dataset, load_image, read_manifest, save_image, write_manifest
from .injector import FULL, Stages, inject_frequency, make_trigger, poison_sample, poison_with_spec
from .layout import BlockSpec, GridConfig, target_to_spec, validate_spacing
from .metrics import psnr, quality, ssim
from .ntk import KernelSimConfig, spatial_sensitivity_experiment, multi_target_kernel_asr, ntk_predict, rbf_kernel
from .pipeline import PoisonPlan, load_config, poison_dataset, run_ablation_stage, run_poison, verify_output
from .spectral import dwt2, fft2, idwt2, ifft2, recompose, svd
from .tuner import TunerConfig, tune_K

__all__ = [
    "BlockSpec", "ConfigError", "DataError", "FULL", "FreqPoisonError", "GridConfig", "KernelSimConfig",
    "LabeledDataset", "PoisonPlan", "PoisonRecord", "Sample", "Stages", "TunerConfig", "dwt2", "fft2", "idwt2",
    "ifft2", "inject_frequency", "spatial_sensitivity_experiment", "load_config", "load_dataset", "load_image", "make_trigger",
    "multi_target_kernel_asr", "ntk_predict", "poison_dataset", "poison_sample", "poison_with_spec", "psnr",
    "quality", "rbf_kernel", "read_manifest", "recompose", "run_ablation_stage", "run_poison", "save_image", "ssim",
    "svd", "target_to_spec", "tune_K", "validate_spacing", "verify_output", "write_manifest",
]
