"""Image upscaling by 2x with iterative shearlet-domain refinement."""

from .baselines import SplineState, fir_baseline, spline_upsample2x
from .core import BorderPolicy, Image, ImageIOError, load_image, save_image
from .metrics import EvalProtocol, evaluate_corpus, gain_vs_u8, make_lr, psnr, write_report
from .refine import RefineConfig, ThresholdSchedule, refine_2x, refine_4x
from .resample import FILTERS, FilterSpec, downsample2x, get_filter, split_low_high, upsample2x, upsample4x
from .shearlet import ScaleConfig, ShearletSystem, build_system, forward, inverse

__version__ = "0.1.0"

__all__ = [
    "BorderPolicy",
    "EvalProtocol",
    "FILTERS",
    "FilterSpec",
    "Image",
    "ImageIOError",
    "RefineConfig",
    "ScaleConfig",
    "ShearletSystem",
    "SplineState",
    "ThresholdSchedule",
    "build_system",
    "downsample2x",
    "evaluate_corpus",
    "fir_baseline",
    "forward",
    "gain_vs_u8",
    "get_filter",
    "inverse",
    "load_image",
    "make_lr",
    "psnr",
    "refine_2x",
    "refine_4x",
    "save_image",
    "spline_upsample2x",
    "split_low_high",
    "upsample2x",
    "upsample4x",
    "write_report",
]
