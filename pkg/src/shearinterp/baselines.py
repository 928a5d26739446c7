"""Reference interpolators: plain FIR upsampling and cubic B-spline."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .core import BorderPolicy, Image
from .resample import UPSAMPLERS, upsample2x

__all__ = [
    "SPLINE_POLE",
    "SplineState",
    "spline_coefficients",
    "spline_upsample2x",
    "fir_baseline",
]

SPLINE_POLE = math.sqrt(3.0) - 2.0
# truncated boundary sums neglect terms below |pole|**horizon
_HORIZON = int(math.ceil(math.log(1e-15) / math.log(abs(SPLINE_POLE))))

_INTEGER_WEIGHTS = np.array([1.0, 4.0, 1.0]) / 6.0
_HALF_WEIGHTS = np.array([1.0, 23.0, 23.0, 1.0]) / 48.0


def _geometric_sum(s: np.ndarray, idx_of, period: int, z: float) -> np.ndarray:
    """``sum_k z**k * s[idx_of(k)]`` for an index map with the given period."""
    if period <= _HORIZON:
        # short signals: fold the infinite sum exactly
        k = np.arange(period)
        return (s[..., idx_of(k)] @ (z**k)) / (1.0 - z**period)
    k = np.arange(_HORIZON)
    return s[..., idx_of(k)] @ (z**k)


def _causal_init(s: np.ndarray, z: float, policy: BorderPolicy) -> np.ndarray:
    n = s.shape[-1]
    if policy is BorderPolicy.MIRROR:
        period = 2 * n - 2

        def idx(k):
            k = k % period
            return np.where(k < n, k, period - k)

        return _geometric_sum(s, idx, period, z)
    return _geometric_sum(s, lambda k: (-k) % n, n, z)


def _anticausal_init(cp: np.ndarray, z: float, policy: BorderPolicy) -> np.ndarray:
    n = cp.shape[-1]
    if policy is BorderPolicy.MIRROR:
        return (z / (z * z - 1.0)) * (cp[..., n - 1] + z * cp[..., n - 2])
    return -z * _geometric_sum(cp, lambda k: (n - 1 + k) % n, n, z)


def _prefilter_axis(s: np.ndarray, policy: BorderPolicy) -> np.ndarray:
    """B-spline coefficients along the last axis (two first-order IIR passes)."""
    n = s.shape[-1]
    if n == 1:
        return s.copy()
    z = SPLINE_POLE
    c0 = _causal_init(s, z, policy)
    cp = np.empty_like(s)
    cp[..., 0] = c0
    cp[..., 1:], _ = lfilter([1.0], [1.0, -z], s[..., 1:], axis=-1, zi=(z * c0)[..., None])
    cm_last = _anticausal_init(cp, z, policy)
    rev = cp[..., ::-1]
    cm = np.empty_like(s)
    cm[..., n - 1] = cm_last
    tail, _ = lfilter([-z], [1.0, -z], rev[..., 1:], axis=-1, zi=(z * cm_last)[..., None])
    cm[..., : n - 1] = tail[..., ::-1]
    return 6.0 * cm


def spline_coefficients(a: np.ndarray, border: BorderPolicy | str = BorderPolicy.MIRROR) -> np.ndarray:
    """Separable cubic B-spline coefficients of a 2-D array."""
    policy = BorderPolicy.parse(border)
    c = _prefilter_axis(np.asarray(a, dtype=np.float64), policy)
    return _prefilter_axis(c.T, policy).T


def _pad(c: np.ndarray, m: int, policy: BorderPolicy) -> np.ndarray:
    mode = "reflect" if policy is BorderPolicy.MIRROR else "wrap"
    return np.pad(c, [(0, 0)] * (c.ndim - 1) + [(m, m)], mode=mode)


def _evaluate_2x_axis(c: np.ndarray, policy: BorderPolicy) -> np.ndarray:
    n = c.shape[-1]
    cp = _pad(c, 2, policy)  # cp[i + 2] == c[i]
    out = np.empty(c.shape[:-1] + (2 * n,))
    out[..., 0::2] = sum(w * cp[..., 1 + k : 1 + k + n] for k, w in enumerate(_INTEGER_WEIGHTS))
    out[..., 1::2] = sum(w * cp[..., 1 + k : 1 + k + n] for k, w in enumerate(_HALF_WEIGHTS))
    return out


@dataclass(frozen=True, eq=False)
class SplineState:
    """Prefiltered coefficient raster plus the pole it was built with."""

    coefficients: np.ndarray
    border: BorderPolicy = BorderPolicy.MIRROR
    pole: float = SPLINE_POLE

    @classmethod
    def from_image(cls, img: Image, border: BorderPolicy | str = BorderPolicy.MIRROR) -> "SplineState":
        policy = BorderPolicy.parse(border)
        return cls(spline_coefficients(img.samples, policy), policy)

    def at_integers(self) -> np.ndarray:
        """Spline evaluated on the sample grid (reproduces the input)."""
        c = self.coefficients
        for axis in (1, 0):
            moved = np.moveaxis(c, axis, -1)
            cp = _pad(moved, 1, self.border)
            n = moved.shape[-1]
            moved = sum(w * cp[..., k : k + n] for k, w in enumerate(_INTEGER_WEIGHTS))
            c = np.moveaxis(moved, -1, axis)
        return c

    def upsample2x(self) -> np.ndarray:
        c = _evaluate_2x_axis(self.coefficients, self.border)
        return _evaluate_2x_axis(c.T, self.border).T


def spline_upsample2x(img: Image, border: BorderPolicy | str = BorderPolicy.MIRROR) -> Image:
    """Cubic B-spline interpolation at twice the resolution."""
    return img.with_samples(SplineState.from_image(img, border).upsample2x())


def fir_baseline(y: Image, name: str) -> Image:
    """Plain FIR 2x interpolation with one of u2, u4, u6, u8, u12."""
    if name not in UPSAMPLERS:
        raise KeyError(f"unknown FIR baseline {name!r}; expected one of {', '.join(UPSAMPLERS)}")
    return upsample2x(y, UPSAMPLERS[name])
