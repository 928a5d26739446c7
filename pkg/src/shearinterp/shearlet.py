"""Non-subsampled cone-adapted shearlet system evaluated on the FFT grid.

Each directional atom is the product of a 1-D wavelet across its cone
axis and a 1-D bump in the slope coordinate, shifted by the atom's shear
slope.  Both profiles come from one 9-tap maximally flat low-pass ``H``:

* ``Phi_m(w) = prod_{i<m} H(2**i w)`` is the level-``m`` scaling response,
* ``W_m(w) = H(2**m w + pi) * Phi_m(w)`` is the level-``m`` wavelet
  (``m = 0`` is the finest scale, reaching Nyquist),
* the bump ``H(t)`` restricted to ``|t| <= pi`` is evaluated at
  ``t = (slope - shear) * n_shears * pi / 2`` so that neighbouring shears
  cross at half power.

The low-pass band is the separable product ``Phi_J(wx) * Phi_J(wy)``.
All responses are real and even, so atoms are real and symmetric in
space; coefficients are computed with real FFTs.  Reconstruction divides
by the summed squared responses (the canonical dual frame), which makes
``inverse(forward(x)) == x`` up to rounding on any grid.
"""

from __future__ import annotations

import functools
import json
import os
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .core import Image

__all__ = [
    "ScaleConfig",
    "Band",
    "ShearletSystem",
    "ShearletCoeffs",
    "build_system",
    "forward",
    "inverse",
    "band_energies",
    "lowpass_response",
    "dump_bands",
    "fft_workers",
]

SQRT2 = np.sqrt(2.0)
# H(w) = (1 + cos w)**2 * (a + b cos w + d cos(w)**2):
# H(0) = 1, H''(0) = 0, H(pi/2) = 1/sqrt(2), fourth-order zero at pi.
_Q = (SQRT2 / 2, 0.75 - SQRT2, SQRT2 / 2 - 0.5)
LOWPASS_TAPS = np.array(
    [(SQRT2 - 1) / 32, -1 / 32, (1 - SQRT2) / 8, 9 / 32, (5 + 3 * SQRT2) / 16,
     9 / 32, (1 - SQRT2) / 8, -1 / 32, (SQRT2 - 1) / 32]
)


def fft_workers() -> int:
    """FFT thread count, capped by ``SHEARLET_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("SHEARLET_THREADS", "1")))
    except ValueError:
        return 1


def lowpass_response(w: np.ndarray) -> np.ndarray:
    """Frequency response of :data:`LOWPASS_TAPS` (real, even, 2*pi periodic)."""
    c = np.cos(w)
    return (1.0 + c) ** 2 * (_Q[0] + c * (_Q[1] + c * _Q[2]))


def _scaling(w: np.ndarray, level: int) -> np.ndarray:
    out = np.ones_like(w)
    for i in range(level):
        out = out * lowpass_response(2.0**i * w)
    return out


def _wavelet(w: np.ndarray, level: int) -> np.ndarray:
    return lowpass_response(2.0**level * w + np.pi) * _scaling(w, level)


def _bump(t: np.ndarray) -> np.ndarray:
    inside = np.abs(t) <= np.pi
    return np.where(inside, lowpass_response(np.where(inside, t, 0.0)), 0.0)


@dataclass(frozen=True)
class ScaleConfig:
    """Scale/direction layout, e.g. ``(0, 3, 4)``.

    Entry 0 stands for the low-pass band; entry ``j >= 1`` requests
    ``2**exponents[j]`` directional bands at scale ``j`` (coarse to fine),
    split evenly between the two cones.
    """

    exponents: tuple

    def __post_init__(self):
        e = tuple(int(x) for x in self.exponents)
        object.__setattr__(self, "exponents", e)
        if len(e) < 2:
            raise ValueError("scale config needs at least one directional scale")
        if e[0] != 0:
            raise ValueError("first scale exponent must be 0 (the low-pass band)")
        if any(x < 1 for x in e[1:]):
            raise ValueError("directional exponents must be >= 1")

    @classmethod
    def parse(cls, value) -> "ScaleConfig":
        if isinstance(value, ScaleConfig):
            return value
        if isinstance(value, str):
            try:
                value = json.loads(value)
            except json.JSONDecodeError:
                raise ValueError(f"cannot parse scale config {value!r}") from None
        return cls(tuple(value))

    @property
    def n_scales(self) -> int:
        """Number of directional scales."""
        return len(self.exponents) - 1

    @property
    def n_bands(self) -> int:
        return 1 + sum(2**e for e in self.exponents[1:])

    def __str__(self):
        return "[" + ",".join(str(e) for e in self.exponents) + "]"


@dataclass(frozen=True)
class Band:
    """Label of one band: ``scale`` 0 is the low-pass, ``cone`` is 'h' or 'v'.

    The horizontal cone holds frequencies with ``|wy| <= |wx|``; its atoms
    oscillate along x and respond to near-vertical edges.
    """

    scale: int
    cone: str | None = None
    shear: int = 0
    slope: float = 0.0

    @property
    def is_lowpass(self) -> bool:
        return self.scale == 0


def _shear_indices(n: int, cone: str) -> range:
    # horizontal cone owns the +1 diagonal, vertical cone the -1 diagonal
    if cone == "h":
        return range(-((n + 1) // 2) + 1, n // 2 + 1)
    return range(-(n // 2), (n + 1) // 2)


class ShearletSystem:
    """Frequency responses of all bands on a ``height x width`` grid.

    ``responses`` holds the real responses on the half spectrum used by
    ``scipy.fft.rfft2`` (shape ``(n_bands, height, width // 2 + 1)``);
    :meth:`response` returns the full grid.  The object is immutable.
    """

    def __init__(self, width: int, height: int, config: ScaleConfig, bands, full):
        self.width = width
        self.height = height
        self.config = config
        self.bands = tuple(bands)
        normalizer = np.einsum("bij,bij->ij", full, full)
        self._full = full
        self.normalizer = normalizer
        half = width // 2 + 1
        self.responses = np.ascontiguousarray(full[:, :, :half])
        self._inv_norm = 1.0 / normalizer[:, :half]
        for arr in (self._full, self.normalizer, self.responses, self._inv_norm):
            arr.setflags(write=False)

    def __len__(self):
        return len(self.bands)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def response(self, b: int) -> np.ndarray:
        """Full-grid response of band ``b`` (unshifted FFT layout)."""
        return self._full[b]

    def frame_bounds(self) -> tuple[float, float]:
        return float(self.normalizer.min()), float(self.normalizer.max())

    def _check(self, shape):
        if tuple(shape) != self.shape:
            raise ValueError(
                f"grid mismatch: data is {shape[1]}x{shape[0]}, system is {self.width}x{self.height}"
            )

    def analyze(self, a: np.ndarray) -> np.ndarray:
        """Coefficient stack ``(n_bands, height, width)`` of a 2-D array."""
        self._check(a.shape)
        workers = fft_workers()
        spec = sfft.rfft2(a, workers=workers)
        return sfft.irfft2(self.responses * spec, s=self.shape, workers=workers)

    def synthesize(self, c: np.ndarray) -> np.ndarray:
        """Dual-frame reconstruction from a coefficient stack."""
        if c.shape[0] != len(self.bands):
            raise ValueError(f"expected {len(self.bands)} bands, got {c.shape[0]}")
        self._check(c.shape[1:])
        workers = fft_workers()
        spec = sfft.rfft2(c, workers=workers)
        acc = np.zeros(spec.shape[1:], dtype=spec.dtype)
        for b in range(len(self.bands)):  # fixed order keeps sums reproducible
            acc += spec[b] * self.responses[b]
        return sfft.irfft2(acc * self._inv_norm, s=self.shape, workers=workers)


@functools.lru_cache(maxsize=8)
def _build(width: int, height: int, exponents: tuple) -> ShearletSystem:
    cfg = ScaleConfig(exponents)
    n_dir = cfg.n_scales
    wx = 2 * np.pi * np.fft.fftfreq(width)[None, :]
    wy = 2 * np.pi * np.fft.fftfreq(height)[:, None]
    wx, wy = np.broadcast_arrays(wx, wy)
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = {"h": np.where(wx != 0, wy / wx, np.inf), "v": np.where(wy != 0, wx / wy, np.inf)}
    axis_freq = {"h": wx, "v": wy}

    labels = [Band(0)]
    responses = [_scaling(wx, n_dir) * _scaling(wy, n_dir)]
    for j, e in enumerate(cfg.exponents[1:], start=1):
        level = n_dir - j
        n_shears = 2 ** (e - 1)
        for cone in ("h", "v"):
            radial = _wavelet(axis_freq[cone], level)
            for k in _shear_indices(n_shears, cone):
                s = 2.0 * k / n_shears
                t = (slope[cone] - s) * n_shears * np.pi / 2
                labels.append(Band(j, cone, k, s))
                responses.append(radial * _bump(np.where(np.isfinite(t), t, np.inf)))
    full = np.stack(responses)
    # enforce exact evenness on the discrete grid (matters on Nyquist rows/columns)
    mirrored = np.roll(full[:, ::-1, ::-1], shift=(1, 1), axis=(1, 2))
    full = 0.5 * (full + mirrored)
    return ShearletSystem(width, height, cfg, labels, full)


def build_system(width: int, height: int, cfg) -> ShearletSystem:
    """Shearlet system for ``width x height`` images (cached per grid and config)."""
    cfg = ScaleConfig.parse(cfg)
    need = 2 ** (cfg.n_scales + 2)
    if width < need or height < need:
        raise ValueError(
            f"grid {width}x{height} too small for {cfg.n_scales} directional scales (need >= {need})"
        )
    return _build(int(width), int(height), cfg.exponents)


@dataclass(frozen=True, eq=False)
class ShearletCoeffs:
    """Full-resolution coefficients, one raster per band in system order."""

    bands: np.ndarray
    system: ShearletSystem

    def __post_init__(self):
        if self.bands.ndim != 3 or self.bands.shape[0] != len(self.system.bands):
            raise ValueError("coefficient stack does not match the system's band count")
        self.system._check(self.bands.shape[1:])

    def __len__(self):
        return self.bands.shape[0]

    def with_bands(self, bands: np.ndarray) -> "ShearletCoeffs":
        return ShearletCoeffs(bands, self.system)


def forward(img: Image, sys: ShearletSystem) -> ShearletCoeffs:
    """Non-subsampled analysis: band ``b`` is ``x`` filtered by atom ``b``."""
    return ShearletCoeffs(sys.analyze(img.samples), sys)


def inverse(coeffs: ShearletCoeffs, sys: ShearletSystem, bit_depth: int = 8) -> Image:
    """Canonical dual-frame synthesis."""
    if coeffs.system is not sys:
        sys._check(coeffs.bands.shape[1:])
    return Image(sys.synthesize(coeffs.bands), bit_depth=bit_depth)


def band_energies(coeffs: ShearletCoeffs) -> np.ndarray:
    """Sum of squared coefficients per band."""
    b = coeffs.bands
    return np.einsum("bij,bij->b", b, b)


def dump_bands(sys: ShearletSystem, out_dir: str | os.PathLike) -> list[str]:
    """Write centred magnitude plots of every band response as PNG files."""
    from .core import save_image

    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for b, label in enumerate(sys.bands):
        mag = np.fft.fftshift(np.abs(sys.response(b)))
        peak = mag.max()
        img = Image(255.0 * mag / peak if peak > 0 else mag)
        if label.is_lowpass:
            name = "band00_lowpass.png"
        else:
            name = f"band{b:02d}_scale{label.scale}_{label.cone}_shear{label.shear:+d}.png"
        path = os.path.join(os.fspath(out_dir), name)
        save_image(img, path)
        paths.append(path)
    return paths
