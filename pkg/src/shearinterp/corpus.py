"""A reproducible 16-image grayscale test corpus from bundled sample photos.

The photos ship with scikit-image, scikit-learn and matplotlib, so no
download is needed.  Colour photos are converted to BT.601 luma and
quantized to 8 bits; every image is centre-cropped to a square.
"""

from __future__ import annotations

import os

import numpy as np

from .core import LUMA_WEIGHTS, Image, clamp_round, save_image

__all__ = ["CORPUS_IDS", "sample_corpus", "write_corpus"]


def _skimage(name):
    def load():
        from skimage import data

        return getattr(data, name)()

    return load


def _skimage_file(fname):
    def load():
        import skimage.data
        from PIL import Image as PILImage

        path = os.path.join(os.path.dirname(skimage.data.__file__), fname)
        return np.asarray(PILImage.open(path).convert("RGB"))

    return load


def _sklearn(fname):
    def load():
        from sklearn.datasets import load_sample_image

        return load_sample_image(fname)

    return load


def _matplotlib(fname):
    def load():
        import matplotlib.cbook
        from PIL import Image as PILImage

        with matplotlib.cbook.get_sample_data(fname) as fh:
            return np.asarray(PILImage.open(fh).convert("RGB"))

    return load


_SOURCES = {
    "astronaut": _skimage("astronaut"),
    "brick": _skimage("brick"),
    "camera": _skimage("camera"),
    "chelsea": _skimage("chelsea"),
    "china": _sklearn("china.jpg"),
    "coffee": _skimage("coffee"),
    "coins": _skimage("coins"),
    "flower": _sklearn("flower.jpg"),
    "grace_hopper": _matplotlib("grace_hopper.jpg"),
    "grass": _skimage("grass"),
    "hubble": _skimage("hubble_deep_field"),
    "ihc": _skimage("immunohistochemistry"),
    "moon": _skimage("moon"),
    "motorcycle": _skimage_file("motorcycle_left.png"),
    "retina": _skimage("retina"),
    "rocket": _skimage("rocket"),
}

CORPUS_IDS = tuple(sorted(_SOURCES))


def _to_luma(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 3:
        a = a[..., :3] @ np.array(LUMA_WEIGHTS)
    return clamp_round(a, 8)


def _center_crop(a: np.ndarray, size: int) -> np.ndarray:
    h, w = a.shape
    s = min(size, h, w)
    s -= s % 2
    top, left = (h - s) // 2, (w - s) // 2
    return a[top : top + s, left : left + s]


def sample_corpus(size: int = 256, ids=None) -> dict[str, Image]:
    """Centre crops of at most ``size x size`` keyed by image id (sorted)."""
    out = {}
    for name in ids or CORPUS_IDS:
        out[name] = Image(_center_crop(_to_luma(_SOURCES[name]()), size))
    return out


def write_corpus(out_dir: str | os.PathLike, size: int = 256, ids=None) -> list[str]:
    """Save :func:`sample_corpus` as 8-bit PNG files; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name, img in sample_corpus(size, ids).items():
        p = os.path.join(os.fspath(out_dir), f"{name}.png")
        save_image(img, p)
        paths.append(p)
    return paths
