"""PSNR evaluation protocol and corpus-level reports.

An LR input is produced from each (even-cropped) HR original with an
external anti-alias filter that the interpolators never see; every
method's 2x result is compared with the original after the same
clamp-round and border crop.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .baselines import fir_baseline, spline_upsample2x
from .core import Image, clamp_round
from .refine import RefineConfig, refine_2x
from .resample import FilterRole, FilterSpec, downsample2x, get_filter, upsample2x

__all__ = [
    "PEAK",
    "EvalProtocol",
    "psnr",
    "crop_even",
    "make_lr",
    "interpolator",
    "gain_vs_u8",
    "ReportRow",
    "evaluate_corpus",
    "summarize",
    "write_report",
    "METHODS",
]

PEAK = 255.0
METHODS = ("u2", "u4", "u6", "u8", "u12", "spline", "shearlet")

Interpolator = Callable[[Image], Image]


@dataclass(frozen=True)
class EvalProtocol:
    external_downsampler: FilterSpec = field(default_factory=lambda: get_filter("svc11"))
    crop_border: int = 8
    clamp_round: bool = True

    def __post_init__(self):
        object.__setattr__(self, "external_downsampler", get_filter(self.external_downsampler))
        if self.external_downsampler.role is not FilterRole.ZERO_PHASE_ANTIALIAS:
            raise ValueError("external downsampler must be a zero-phase anti-alias filter")
        if self.crop_border < 0:
            raise ValueError("crop_border must be non-negative")

    def describe(self) -> str:
        return (
            f"external_downsampler={self.external_downsampler.name} "
            f"crop_border={self.crop_border} clamp_round={int(self.clamp_round)} peak={PEAK:g}"
        )

    @classmethod
    def from_dict(cls, d: Mapping) -> "EvalProtocol":
        extra = set(d) - {"external_downsampler", "crop_border", "clamp_round"}
        if extra:
            raise ValueError(f"unknown protocol keys: {sorted(extra)}")
        base = cls()
        return cls(
            external_downsampler=d.get("external_downsampler", base.external_downsampler),
            crop_border=int(d.get("crop_border", base.crop_border)),
            clamp_round=bool(d.get("clamp_round", base.clamp_round)),
        )

    @classmethod
    def from_json(cls, source: str | os.PathLike) -> "EvalProtocol":
        text = os.fspath(source)
        if os.path.exists(text):
            with open(text) as fh:
                return cls.from_dict(json.load(fh))
        return cls.from_dict(json.loads(text))


def psnr(ref: Image, test: Image, crop: int = 0) -> float:
    """PSNR in dB against peak 255 over the region ``crop`` pixels inside the border."""
    if ref.shape != test.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {test.shape}")
    h, w = ref.shape
    if crop < 0 or 2 * crop >= h or 2 * crop >= w:
        raise ValueError(f"crop {crop} leaves no pixels in a {w}x{h} image")
    sl = (slice(crop, h - crop), slice(crop, w - crop))
    diff = ref.samples[sl] - test.samples[sl]
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / mse)


def crop_even(img: Image) -> Image:
    """Drop a trailing row/column so both dimensions are even."""
    h, w = img.shape
    if h % 2 == 0 and w % 2 == 0:
        return img
    return img.with_samples(img.samples[: h - h % 2, : w - w % 2])


def make_lr(hr: Image, protocol: EvalProtocol | None = None) -> Image:
    """LR input generated with the protocol's external downsampler."""
    protocol = protocol or EvalProtocol()
    return downsample2x(hr, protocol.external_downsampler)


def interpolator(name: str, config: RefineConfig | None = None) -> Interpolator:
    """2x interpolator selected by method name (see :data:`METHODS`)."""
    if name == "shearlet":
        cfg = config or RefineConfig()
        return lambda y: refine_2x(y, cfg)
    if name == "spline":
        return spline_upsample2x
    if name in METHODS:
        return lambda y: fir_baseline(y, name)
    raise KeyError(f"unknown method {name!r}; expected one of {', '.join(METHODS)}")


def _score(hr: Image, estimate: Image, protocol: EvalProtocol) -> float:
    if protocol.clamp_round:
        estimate = estimate.with_samples(clamp_round(estimate.samples, 8))
    return psnr(hr, estimate, protocol.crop_border)


def gain_vs_u8(hr: Image, method: Interpolator, protocol: EvalProtocol | None = None) -> float:
    """PSNR of ``method`` minus PSNR of the plain u8 interpolator, in dB."""
    protocol = protocol or EvalProtocol()
    hr = crop_even(hr)
    lr = make_lr(hr, protocol)
    test = _score(hr, method(lr), protocol)
    ref = _score(hr, upsample2x(lr, "u8"), protocol)
    return test - ref


@dataclass(frozen=True)
class ReportRow:
    image_id: str
    method: str
    psnr_db: float
    gain_vs_u8_db: float
    config_hash: str


def _hash_for(method: str, config: RefineConfig, protocol: EvalProtocol) -> str:
    import hashlib

    payload = {"method": method, "protocol": protocol.describe()}
    if method == "shearlet":
        payload["config"] = config.to_dict()
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:12]


def _evaluate_one(image_id, hr, methods, config, protocol):
    hr = crop_even(hr)
    lr = make_lr(hr, protocol)
    ref = _score(hr, upsample2x(lr, "u8"), protocol)
    rows = []
    for m in methods:
        p = ref if m == "u8" else _score(hr, interpolator(m, config)(lr), protocol)
        rows.append(ReportRow(image_id, m, p, p - ref, _hash_for(m, config, protocol)))
    return rows


def evaluate_corpus(
    images: Mapping[str, Image] | Iterable[tuple[str, Image]],
    methods: Sequence[str] = ("u8", "shearlet"),
    config: RefineConfig | None = None,
    protocol: EvalProtocol | None = None,
    threads: int = 1,
) -> list[ReportRow]:
    """Per-image PSNR rows ordered by ``(image_id, method)``.

    Images are processed concurrently on ``threads`` workers; the result
    does not depend on the worker count.
    """
    config = config or RefineConfig()
    protocol = protocol or EvalProtocol()
    items = list(images.items() if isinstance(images, Mapping) else images)
    if not items:
        raise ValueError("empty corpus")
    for m in methods:
        if m not in METHODS:
            raise KeyError(f"unknown method {m!r}")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda it: _evaluate_one(it[0], it[1], methods, config, protocol), items))
    else:
        chunks = [_evaluate_one(i, img, methods, config, protocol) for i, img in items]
    rows = [r for chunk in chunks for r in chunk]
    return sorted(rows, key=lambda r: (r.image_id, r.method))


def summarize(rows: Sequence[ReportRow]) -> dict[str, dict[str, float]]:
    """Mean PSNR and mean gain per method, plus the difference to ``shearlet``."""
    out: dict[str, dict[str, float]] = {}
    methods = sorted({r.method for r in rows})
    for m in methods:
        sel = [r for r in rows if r.method == m]
        out[m] = {
            "mean_psnr_db": float(np.mean([r.psnr_db for r in sel])),
            "mean_gain_vs_u8_db": float(np.mean([r.gain_vs_u8_db for r in sel])),
        }
    if "shearlet" in out:
        ref = out["shearlet"]["mean_psnr_db"]
        for m in methods:
            out[m]["diff_vs_shearlet_db"] = out[m]["mean_psnr_db"] - ref
    return out


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.4f}"


def write_report(rows: Sequence[ReportRow], out=None, protocol: EvalProtocol | None = None, notes: Sequence[str] = ()) -> str:
    """Render rows as CSV with ``#`` preamble lines and summary rows.

    Summary rows use image ids ``AVERAGE`` (mean PSNR and mean gain) and,
    when ``shearlet`` is present, ``PSNR_DIFF`` (method minus shearlet mean).
    Returns the text and writes it to ``out`` (path or file object) if given.
    """
    protocol = protocol or EvalProtocol()
    buf = io.StringIO()
    buf.write(f"# protocol: {protocol.describe()}\n")
    for n in notes:
        buf.write(f"# {n}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["image_id", "method", "psnr_db", "gain_vs_u8_db", "config_hash"])
    for r in rows:
        w.writerow([r.image_id, r.method, _fmt(r.psnr_db), _fmt(r.gain_vs_u8_db), r.config_hash])
    hashes = {r.method: r.config_hash for r in rows}
    for m, s in summarize(rows).items():
        w.writerow(["AVERAGE", m, _fmt(s["mean_psnr_db"]), _fmt(s["mean_gain_vs_u8_db"]), hashes[m]])
    for m, s in summarize(rows).items():
        if "diff_vs_shearlet_db" in s:
            w.writerow(["PSNR_DIFF", m, _fmt(s["diff_vs_shearlet_db"]), "", hashes[m]])
    text = buf.getvalue()
    if out is not None:
        if hasattr(out, "write"):
            out.write(text)
        else:
            with open(out, "w", newline="") as fh:
                fh.write(text)
    return text
