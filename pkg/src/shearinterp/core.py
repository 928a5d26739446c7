"""Image container, border policies and PGM/PNG file I/O.

All processing happens on float64 samples; quantization to integers only
takes place in :func:`save_image` (and in the PSNR protocol, see
:mod:`shearinterp.metrics`).
"""

from __future__ import annotations

import enum
import os
import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Image",
    "BorderPolicy",
    "ImageIOError",
    "UnreadableImageError",
    "ImageFormatError",
    "EmptyImageError",
    "ImageWriteError",
    "load_image",
    "save_image",
    "extend",
    "pad_array",
    "clamp_round",
    "LUMA_WEIGHTS",
]

# ITU-R BT.601 luma weights on full-range R, G, B.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class ImageIOError(Exception):
    """Base class for image file errors."""


class UnreadableImageError(ImageIOError):
    """The file does not exist or cannot be opened."""


class ImageFormatError(ImageIOError):
    """The file is not a supported or well-formed PGM/PNG."""


class EmptyImageError(ImageIOError):
    """The decoded image has a zero dimension."""


class ImageWriteError(ImageIOError):
    """The output path cannot be written."""


class BorderPolicy(str, enum.Enum):
    """Signal extension used outside the image support.

    ``MIRROR`` is whole-sample symmetric: ``[a, b, c]`` continues as
    ``..., c, b, a, b, c, b, a, ...`` (the edge sample is not repeated).
    """

    MIRROR = "mirror"
    PERIODIC = "periodic"

    @classmethod
    def parse(cls, value: "BorderPolicy | str") -> "BorderPolicy":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown border policy {value!r}") from None


@dataclass(frozen=True, eq=False)
class Image:
    """Single-channel raster of real samples.

    ``samples`` is stored as a read-only ``(height, width)`` float64 array
    (row-major, as usual for numpy).
    """

    samples: np.ndarray
    bit_depth: int = 8

    def __post_init__(self):
        a = np.array(self.samples, dtype=np.float64, copy=True)
        if a.ndim != 2:
            raise ValueError(f"image samples must be 2-D, got shape {a.shape}")
        if a.shape[0] < 1 or a.shape[1] < 1:
            raise EmptyImageError(f"image has zero dimension: {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("image samples must be finite")
        if self.bit_depth < 1:
            raise ValueError("bit_depth must be positive")
        a.setflags(write=False)
        object.__setattr__(self, "samples", a)

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.samples.shape

    @property
    def peak(self) -> int:
        return 2**self.bit_depth - 1

    def with_samples(self, samples: np.ndarray) -> "Image":
        return Image(samples, bit_depth=self.bit_depth)

    def __eq__(self, other):
        if not isinstance(other, Image):
            return NotImplemented
        return self.bit_depth == other.bit_depth and np.array_equal(
            self.samples, other.samples
        )

    __hash__ = None


def clamp_round(a: np.ndarray, bit_depth: int = 8) -> np.ndarray:
    """Round half up and clamp to ``[0, 2**bit_depth - 1]``."""
    return np.clip(np.floor(np.asarray(a, dtype=np.float64) + 0.5), 0, 2**bit_depth - 1)


# --- decoding ---------------------------------------------------------------

_PNM_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*([^\s#]+)")


def _decode_pgm(data: bytes) -> Image:
    pos = 0
    tokens = []
    for _ in range(4):
        m = _PNM_TOKEN.match(data, pos)
        if m is None:
            raise ImageFormatError("truncated PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    if tokens[0] != b"P5":
        raise ImageFormatError(f"unsupported PNM magic {tokens[0]!r}")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ImageFormatError("malformed PGM header") from None
    # exactly one whitespace byte separates the header from the raster
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise ImageFormatError("truncated PGM header")
    pos += 1
    if width == 0 or height == 0:
        raise EmptyImageError("PGM has zero dimension")
    if not 0 < maxval < 65536:
        raise ImageFormatError(f"invalid PGM maxval {maxval}")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
    need = width * height * dtype.itemsize
    raster = data[pos : pos + need]
    if len(raster) < need:
        raise ImageFormatError("truncated PGM raster")
    a = np.frombuffer(raster, dtype=dtype).reshape(height, width)
    return Image(a.astype(np.float64), bit_depth=16 if maxval > 255 else 8)


def _decode_png(path: str) -> Image:
    from PIL import Image as PILImage

    try:
        with PILImage.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("I;16", "I;16B", "I;16L", "I"):
                a = np.asarray(im, dtype=np.float64)
                return Image(a, bit_depth=16)
            if mode in ("1", "L", "LA"):
                a = np.asarray(im.convert("L"), dtype=np.float64)
                return Image(a, bit_depth=8)
            rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
    except ImageIOError:
        raise
    except (OSError, SyntaxError, ValueError) as exc:
        raise ImageFormatError(f"cannot decode PNG {path!r}: {exc}") from exc
    return Image(rgb @ np.array(LUMA_WEIGHTS), bit_depth=8)


def load_image(path: str | os.PathLike) -> Image:
    """Read an 8/16-bit P5 PGM or a PNG file.

    Colour PNGs are reduced to BT.601 luma; alpha is ignored.
    """
    path = os.fspath(path)
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise UnreadableImageError(f"cannot read {path!r}: {exc}") from exc
    if data[:2] == b"P5":
        return _decode_pgm(data)
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        img = _decode_png(path)
        if img.width == 0 or img.height == 0:
            raise EmptyImageError(f"{path!r} has zero dimension")
        return img
    raise ImageFormatError(f"{path!r} is neither P5 PGM nor PNG")


# --- encoding ---------------------------------------------------------------


def save_image(img: Image, path: str | os.PathLike) -> None:
    """Write ``img`` as PGM (``.pgm``) or PNG (anything else).

    Samples are rounded half up and clamped to the bit depth first.
    """
    path = os.fspath(path)
    q = clamp_round(img.samples, img.bit_depth)
    wide = img.bit_depth > 8
    try:
        if path.lower().endswith((".pgm", ".pnm")):
            raster = q.astype(">u2" if wide else np.uint8)
            header = f"P5\n{img.width} {img.height}\n{img.peak if wide else 255}\n"
            with open(path, "wb") as fh:
                fh.write(header.encode("ascii"))
                fh.write(raster.tobytes())
        else:
            from PIL import Image as PILImage

            if wide:
                im = PILImage.fromarray(q.astype(np.uint16))
            else:
                im = PILImage.fromarray(q.astype(np.uint8), mode="L")
            im.save(path, format="PNG")
    except OSError as exc:
        raise ImageWriteError(f"cannot write {path!r}: {exc}") from exc


# --- border extension -------------------------------------------------------


def pad_array(a: np.ndarray, margin: int, policy: BorderPolicy | str, axis=None) -> np.ndarray:
    """Extend ``a`` by ``margin`` samples on both sides of ``axis``.

    ``axis=None`` pads every axis.  Margins longer than the signal fold
    back repeatedly (mirror) or wrap repeatedly (periodic).
    """
    policy = BorderPolicy.parse(policy)
    if margin < 0:
        raise ValueError("margin must be non-negative")
    if margin == 0:
        return a
    axes = range(a.ndim) if axis is None else [axis]
    width = [(0, 0)] * a.ndim
    for ax in axes:
        width[ax] = (margin, margin)
    mode = "reflect" if policy is BorderPolicy.MIRROR else "wrap"
    return np.pad(a, width, mode=mode)


def extend(img: Image, policy: BorderPolicy | str, margin: int) -> Image:
    """Pad both dimensions of ``img`` by ``margin`` following ``policy``."""
    if margin == 0:
        return img
    return img.with_samples(pad_array(img.samples, margin, policy))
