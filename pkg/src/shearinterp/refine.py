"""Iterative high-frequency refinement of an FIR-interpolated image.

Starting from ``x0 = U y`` the estimate is repeatedly sparsified in the
shearlet domain (hard thresholding with a geometrically decaying
threshold), and only the part of the sparse approximation outside the
``U D`` low-pass space is added back onto ``x0``::

    x_{k+1} = U y + (I - U D) T_k(x_k)
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from .core import BorderPolicy, Image
from .resample import FilterRole, FilterSpec, get_filter, split_arrays, up2
from .shearlet import ScaleConfig, ShearletCoeffs, ShearletSystem, build_system

__all__ = [
    "ThresholdSchedule",
    "RefineConfig",
    "hard_threshold",
    "sparse_approx",
    "refine_2x",
    "refine_4x",
    "MIN_INPUT_SIZE",
]

MIN_INPUT_SIZE = 16


@dataclass(frozen=True)
class ThresholdSchedule:
    """Thresholds ``thr_max * decay**k`` for ``k = 0 .. iterations - 1``."""

    thr_max: float = 100.0
    decay: float = 0.6
    iterations: int = 8

    def __post_init__(self):
        if not self.thr_max > 0:
            raise ValueError("thr_max must be positive")
        if not 0 < self.decay <= 1:
            raise ValueError("decay must lie in (0, 1]")
        if self.iterations < 0 or int(self.iterations) != self.iterations:
            raise ValueError("iterations must be a non-negative integer")

    def thresholds(self) -> list[float]:
        return [self.thr_max * self.decay**k for k in range(int(self.iterations))]

    def __iter__(self):
        return iter(self.thresholds())


def _filter_json(f: FilterSpec):
    from .resample import FILTERS

    if FILTERS.get(f.name) == f:
        return f.name
    return f.to_json()


@dataclass(frozen=True)
class RefineConfig:
    """Full parameterization of the refinement loop.

    ``threshold_weights`` optionally scales the threshold per directional
    scale (coarse to fine); ``None`` applies one threshold to all bands.
    """

    upsampler: FilterSpec = field(default_factory=lambda: get_filter("u6"))
    downsampler: FilterSpec = field(default_factory=lambda: get_filter("d13"))
    scale_config: ScaleConfig = field(default_factory=lambda: ScaleConfig((0, 3, 4)))
    schedule: ThresholdSchedule = field(default_factory=ThresholdSchedule)
    border: BorderPolicy = BorderPolicy.MIRROR
    threshold_weights: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "upsampler", get_filter(self.upsampler))
        object.__setattr__(self, "downsampler", get_filter(self.downsampler))
        object.__setattr__(self, "scale_config", ScaleConfig.parse(self.scale_config))
        object.__setattr__(self, "border", BorderPolicy.parse(self.border))
        if self.upsampler.role is not FilterRole.HALF_SAMPLE_INTERP:
            raise ValueError(f"upsampler {self.upsampler.name} is not a half-sample interpolator")
        if self.downsampler.role is not FilterRole.ZERO_PHASE_ANTIALIAS:
            raise ValueError(f"downsampler {self.downsampler.name} is not an anti-alias filter")
        if self.threshold_weights is not None:
            w = tuple(float(x) for x in self.threshold_weights)
            if len(w) != self.scale_config.n_scales:
                raise ValueError("threshold_weights needs one entry per directional scale")
            object.__setattr__(self, "threshold_weights", w)

    def replace(self, **changes) -> "RefineConfig":
        from dataclasses import replace

        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = {
            "upsampler": _filter_json(self.upsampler),
            "downsampler": _filter_json(self.downsampler),
            "scales": list(self.scale_config.exponents),
            "thr_max": self.schedule.thr_max,
            "decay": self.schedule.decay,
            "iters": self.schedule.iterations,
            "border": self.border.value,
        }
        if self.threshold_weights is not None:
            d["threshold_weights"] = list(self.threshold_weights)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:12]

    @classmethod
    def from_dict(cls, d: Mapping) -> "RefineConfig":
        known = {"upsampler", "downsampler", "scales", "thr_max", "decay", "iters", "border", "threshold_weights"}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        base = cls()
        schedule = ThresholdSchedule(
            float(d.get("thr_max", base.schedule.thr_max)),
            float(d.get("decay", base.schedule.decay)),
            int(d.get("iters", base.schedule.iterations)),
        )
        return cls(
            upsampler=d.get("upsampler", base.upsampler),
            downsampler=d.get("downsampler", base.downsampler),
            scale_config=d.get("scales", base.scale_config),
            schedule=schedule,
            border=d.get("border", base.border),
            threshold_weights=d.get("threshold_weights"),
        )

    @classmethod
    def from_json(cls, source: str | os.PathLike) -> "RefineConfig":
        """Parse a JSON string or the JSON file at ``source``."""
        text = os.fspath(source)
        if os.path.exists(text):
            with open(text) as fh:
                return cls.from_dict(json.load(fh))
        return cls.from_dict(json.loads(text))


def _band_thresholds(sys: ShearletSystem, t: float, weights) -> np.ndarray:
    per_band = np.full(len(sys.bands), t)
    if weights is not None:
        for b, label in enumerate(sys.bands):
            if not label.is_lowpass:
                per_band[b] = t * weights[label.scale - 1]
    return per_band


def _threshold_stack(c: np.ndarray, per_band: np.ndarray) -> np.ndarray:
    out = c.copy()
    directional = out[1:]
    directional[np.abs(directional) < per_band[1:, None, None]] = 0.0
    return out


def hard_threshold(coeffs: ShearletCoeffs, t: float, weights=None) -> ShearletCoeffs:
    """Zero directional coefficients with ``|c| < t``; the low-pass band is kept."""
    if not t > 0:
        raise ValueError("threshold must be positive")
    per_band = _band_thresholds(coeffs.system, t, weights)
    return coeffs.with_bands(_threshold_stack(coeffs.bands, per_band))


def _sparse(a: np.ndarray, sys: ShearletSystem, t: float, weights=None) -> np.ndarray:
    c = sys.analyze(a)
    return sys.synthesize(_threshold_stack(c, _band_thresholds(sys, t, weights)))


def sparse_approx(x: Image, sys: ShearletSystem, t: float, weights=None) -> Image:
    """Threshold-and-reconstruct approximation of ``x``."""
    if not t > 0:
        raise ValueError("threshold must be positive")
    return x.with_samples(_sparse(x.samples, sys, t, weights))


IterationHook = Callable[[int, float, np.ndarray], None]


def refine_2x(
    y: Image,
    cfg: RefineConfig | None = None,
    on_iteration: IterationHook | None = None,
) -> Image:
    """Upscale ``y`` by two with shearlet-based high-frequency refinement.

    ``on_iteration(k, threshold, estimate)`` is called after every
    refinement step, if given.
    """
    cfg = cfg or RefineConfig()
    if y.width < MIN_INPUT_SIZE or y.height < MIN_INPUT_SIZE:
        raise ValueError(f"input must be at least {MIN_INPUT_SIZE}x{MIN_INPUT_SIZE}, got {y.width}x{y.height}")
    u, d = cfg.upsampler.taps, cfg.downsampler.taps
    x0 = up2(y.samples, u, cfg.border)
    thresholds = cfg.schedule.thresholds()
    if not thresholds:
        return y.with_samples(x0)
    # thresholds are given for 8-bit data
    unit = (2**y.bit_depth - 1) / 255.0
    sys = build_system(x0.shape[1], x0.shape[0], cfg.scale_config)
    x = x0
    for k, t in enumerate(thresholds):
        a = _sparse(x, sys, t * unit, cfg.threshold_weights)
        _, high = split_arrays(a, u, d, cfg.border)
        x = x0 + high
        if not np.all(np.isfinite(x)):
            raise FloatingPointError(f"non-finite samples after iteration {k}")
        if on_iteration is not None:
            on_iteration(k, t * unit, x)
    return y.with_samples(x)


def refine_4x(y: Image, cfg: RefineConfig | None = None, on_iteration: IterationHook | None = None) -> Image:
    """Two cascaded :func:`refine_2x` stages."""
    return refine_2x(refine_2x(y, cfg, on_iteration), cfg, on_iteration)
