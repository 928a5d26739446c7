"""Separable 2x polyphase FIR resampling.

LR sample ``i`` sits on HR sample ``2i`` in both directions: upsampling
copies it there and computes the odd HR positions with an even-length
half-sample interpolator, downsampling filters with an odd-length
zero-phase anti-alias filter and keeps the even-indexed samples.
"""

from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .core import BorderPolicy, Image, pad_array

__all__ = [
    "FilterRole",
    "FilterSpec",
    "FILTERS",
    "UPSAMPLERS",
    "DOWNSAMPLERS",
    "TABLE3_FILTERS",
    "get_filter",
    "load_filter",
    "upsample2x",
    "downsample2x",
    "split_low_high",
    "upsample4x",
]


class FilterRole(str, enum.Enum):
    HALF_SAMPLE_INTERP = "half_sample_interp"
    ZERO_PHASE_ANTIALIAS = "zero_phase_antialias"


@dataclass(frozen=True)
class FilterSpec:
    """Symmetric FIR filter stored as numerators over a denominator.

    ``taps`` is normalized to unit DC gain, i.e. divided by the numerator
    sum; for every built-in filter that sum equals ``denominator``.
    """

    numerators: tuple
    denominator: float
    role: FilterRole
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "numerators", tuple(self.numerators))
        object.__setattr__(self, "role", FilterRole(self.role))
        num = self.numerators
        if not num:
            raise ValueError("filter has no taps")
        if self.denominator <= 0:
            raise ValueError("denominator must be positive")
        if tuple(reversed(num)) != num:
            raise ValueError(f"filter {self.name} is not symmetric")
        even = len(num) % 2 == 0
        if self.role is FilterRole.HALF_SAMPLE_INTERP and not even:
            raise ValueError(f"half-sample interpolator {self.name} needs even length")
        if self.role is FilterRole.ZERO_PHASE_ANTIALIAS and even:
            raise ValueError(f"anti-alias filter {self.name} needs odd length")
        if sum(num) == 0:
            raise ValueError(f"filter {self.name} has zero DC gain")

    @property
    def taps(self) -> np.ndarray:
        t = np.asarray(self.numerators, dtype=np.float64)
        return t / t.sum()

    @property
    def exact_dc_gain(self) -> Fraction:
        """Numerator sum over the declared denominator, as an exact rational."""
        return sum(Fraction(n) for n in self.numerators) / Fraction(self.denominator)

    def __len__(self):
        return len(self.numerators)

    def to_json(self) -> dict:
        return {"taps": list(self.numerators), "den": self.denominator, "role": self.role.value}


def _interp(name, num, den):
    return FilterSpec(tuple(num), den, FilterRole.HALF_SAMPLE_INTERP, name)


def _mirror(name, half, den):
    """Anti-alias filter from its left half including the centre tap."""
    return FilterSpec(tuple(half) + tuple(reversed(half[:-1])), den, FilterRole.ZERO_PHASE_ANTIALIAS, name)


UPSAMPLERS: dict[str, FilterSpec] = {
    f.name: f
    for f in (
        _interp("u2", [1, 1], 2),
        _interp("u4", [-1, 9, 9, -1], 16),
        _interp("u6", [1, -5, 20, 20, -5, 1], 32),
        _interp("u8", [-1, 4, -11, 40, 40, -11, 4, -1], 64),
        _interp("u12", [-1, 4, -10, 22, -48, 161, 161, -48, 22, -10, 4, -1], 256),
    )
}

# Every d filter is the half-band partner of a u filter: centre tap 1/2, the
# odd offsets carry the u taps halved, the even offsets are zero.  The
# numerators of every filter sum exactly to the denominator.
DOWNSAMPLERS: dict[str, FilterSpec] = {
    f.name: f
    for f in (
        _mirror("d3", [1, 2], 4),
        _mirror("d9", [-1, 0, 9, 16], 32),
        _mirror("d13", [1, 0, -5, 0, 20, 32], 64),
        _mirror("d17", [-1, 0, 4, 0, -11, 0, 40, 64], 128),
        _mirror("d25", [-1, 0, 4, 0, -10, 0, 22, 0, -48, 0, 161, 256], 512),
    )
}

TABLE3_FILTERS: dict[str, FilterSpec] = {
    f.name: f
    for f in (
        _mirror("tab3_1", [-1, 0, 9, 16], 32),
        _mirror("tab3_2", [-2, 0, 64, 132], 256),
        _mirror("tab3_3", [1, 0, -5, 0, 20, 32], 64),
        _mirror("tab3_4", [1, 0, -11, 0, 74, 128], 256),
        _mirror("tab3_5", [-1, 0, 4, 0, -17, 0, 78, 128], 256),
        _mirror("tab3_6", [1, 0, -2, 0, 7, 0, -21, 0, 79, 128], 256),
    )
}

FILTERS: dict[str, FilterSpec] = {
    **UPSAMPLERS,
    **DOWNSAMPLERS,
    "svc11": _mirror("svc11", [2, -2, -9, 3, 40, 60], 128),
    **TABLE3_FILTERS,
}


def load_filter(source: str | os.PathLike | Mapping, name: str = "custom") -> FilterSpec:
    """Build a filter from ``{"taps": [...], "den": n, "role": "..."}``.

    ``source`` may be the mapping itself, a JSON string or a path to a
    JSON file.
    """
    if isinstance(source, Mapping):
        obj = source
    else:
        text = os.fspath(source)
        if os.path.exists(text):
            with open(text) as fh:
                obj = json.load(fh)
        else:
            obj = json.loads(text)
    try:
        return FilterSpec(tuple(obj["taps"]), obj.get("den", sum(obj["taps"])), obj["role"], obj.get("name", name))
    except KeyError as exc:
        raise ValueError(f"filter description lacks {exc.args[0]!r}") from None


def get_filter(name: "str | FilterSpec | Mapping") -> FilterSpec:
    """Look up a registry filter by symbol, or pass a spec through."""
    if isinstance(name, FilterSpec):
        return name
    if isinstance(name, Mapping):
        return load_filter(name)
    try:
        return FILTERS[name]
    except KeyError:
        raise KeyError(f"unknown filter {name!r}; known: {', '.join(FILTERS)}") from None


def _require_role(f: FilterSpec, role: FilterRole):
    if f.role is not role:
        raise ValueError(f"filter {f.name} has role {f.role.value}, need {role.value}")


# --- array kernels -----------------------------------------------------------


def _up_axis(a: np.ndarray, taps: np.ndarray, policy, axis: int) -> np.ndarray:
    a = np.moveaxis(a, axis, -1)
    n = a.shape[-1]
    half = len(taps) // 2
    xp = pad_array(a, half, policy, axis=-1)
    odd = taps[0] * xp[..., 1 : 1 + n]
    for k in range(1, len(taps)):
        odd = odd + taps[k] * xp[..., 1 + k : 1 + k + n]
    out = np.empty(a.shape[:-1] + (2 * n,))
    out[..., 0::2] = a
    out[..., 1::2] = odd
    return np.moveaxis(out, -1, axis)


def _down_axis(a: np.ndarray, taps: np.ndarray, policy, axis: int) -> np.ndarray:
    a = np.moveaxis(a, axis, -1)
    n = a.shape[-1]
    c = len(taps) // 2
    xp = pad_array(a, c, policy, axis=-1)
    out = taps[0] * xp[..., 0:n:2]
    for k in range(1, len(taps)):
        out = out + taps[k] * xp[..., k : k + n : 2]
    return np.moveaxis(out, -1, axis)


def up2(a: np.ndarray, taps: np.ndarray, policy=BorderPolicy.MIRROR, order=(1, 0)) -> np.ndarray:
    """Array form of :func:`upsample2x`; ``order`` lists the axes in filtering order."""
    for ax in order:
        a = _up_axis(a, taps, policy, ax)
    return a


def down2(a: np.ndarray, taps: np.ndarray, policy=BorderPolicy.MIRROR, order=(1, 0)) -> np.ndarray:
    """Array form of :func:`downsample2x`."""
    if a.shape[0] % 2 or a.shape[1] % 2:
        raise ValueError(f"downsample2x needs even dimensions, got {a.shape[1]}x{a.shape[0]}")
    for ax in order:
        a = _down_axis(a, taps, policy, ax)
    return a


# --- image-level operations ------------------------------------------------


def upsample2x(img: Image, f: FilterSpec | str, border: BorderPolicy | str = BorderPolicy.MIRROR) -> Image:
    """Interpolate ``img`` to twice its width and height."""
    f = get_filter(f)
    _require_role(f, FilterRole.HALF_SAMPLE_INTERP)
    return img.with_samples(up2(img.samples, f.taps, BorderPolicy.parse(border)))


def downsample2x(img: Image, f: FilterSpec | str, border: BorderPolicy | str = BorderPolicy.MIRROR) -> Image:
    """Anti-alias filter ``img`` and keep the even-indexed rows and columns."""
    f = get_filter(f)
    _require_role(f, FilterRole.ZERO_PHASE_ANTIALIAS)
    return img.with_samples(down2(img.samples, f.taps, BorderPolicy.parse(border)))


def split_arrays(a: np.ndarray, u_taps, d_taps, policy=BorderPolicy.MIRROR):
    low = up2(down2(a, d_taps, policy), u_taps, policy)
    return low, a - low


def split_low_high(
    img: Image,
    u: FilterSpec | str,
    d: FilterSpec | str,
    border: BorderPolicy | str = BorderPolicy.MIRROR,
) -> tuple[Image, Image]:
    """Split ``img`` into ``U D img`` and the complement ``img - U D img``."""
    u, d = get_filter(u), get_filter(d)
    _require_role(u, FilterRole.HALF_SAMPLE_INTERP)
    _require_role(d, FilterRole.ZERO_PHASE_ANTIALIAS)
    low, high = split_arrays(img.samples, u.taps, d.taps, BorderPolicy.parse(border))
    return img.with_samples(low), img.with_samples(high)


def upsample4x(img: Image, f: FilterSpec | str, border: BorderPolicy | str = BorderPolicy.MIRROR) -> Image:
    """Two cascaded :func:`upsample2x` stages."""
    return upsample2x(upsample2x(img, f, border), f, border)
