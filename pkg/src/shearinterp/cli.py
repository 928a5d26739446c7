"""Command-line interface: ``shearinterp {upscale,eval,sweep,dump-bands,make-corpus}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 non-finite result.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from .baselines import spline_upsample2x
from .core import ImageIOError, load_image, save_image
from .metrics import METHODS, EvalProtocol, evaluate_corpus, summarize, write_report
from .refine import RefineConfig, ThresholdSchedule, refine_2x, refine_4x
from .resample import DOWNSAMPLERS, TABLE3_FILTERS, UPSAMPLERS, upsample2x, upsample4x
from .shearlet import ScaleConfig, build_system, dump_bands

log = logging.getLogger("shearinterp")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

IMAGE_SUFFIXES = {".pgm", ".pnm", ".png", ".tif", ".tiff", ".bmp", ".jpg", ".jpeg"}

DEFAULT_GRIDS = {
    "filters": {"upsamplers": list(UPSAMPLERS), "downsamplers": list(DOWNSAMPLERS)},
    "scales": {
        "scales": [[0, n] for n in range(1, 6)]
        + [[0, a, b] for a in range(1, 5) for b in range(a, 6)]
    },
    "thresholds": {"thr_max": [50, 75, 100, 125, 150, 200], "decay": [0.4, 0.5, 0.6, 0.7, 0.8]},
    "downsamplers": {"filters": list(TABLE3_FILTERS)},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SHEARLET_THREADS", "1")))
    except ValueError:
        return 1


def _load_config(source) -> RefineConfig:
    return RefineConfig() if source is None else RefineConfig.from_json(source)


def _load_protocol(source) -> EvalProtocol:
    return EvalProtocol() if source is None else EvalProtocol.from_json(source)


def load_corpus(directory) -> dict:
    """Every decodable image in ``directory`` keyed by file stem, sorted."""
    root = Path(directory)
    if not root.is_dir():
        raise ImageIOError(f"corpus directory not found: {directory}")
    files = sorted(p for p in root.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    corpus = {p.stem: load_image(p) for p in files}
    if not corpus:
        raise ImageIOError(f"no images in corpus directory {directory}")
    return corpus


def _check_finite(a: np.ndarray):
    if not np.all(np.isfinite(a)):
        raise FloatingPointError("non-finite samples in result")


# --- upscale --------------------------------------------------------------

def cmd_upscale(args) -> int:
    img = load_image(args.input)
    cfg = _load_config(args.config)
    t0 = time.perf_counter()
    if args.method == "shearlet":
        hook = None
        if getattr(args, "verbose", False):
            def hook(k, t, x):
                print(f"iteration {k} threshold {t:.6g} elapsed {time.perf_counter() - t0:.3f}s", file=sys.stderr)
        out = (refine_2x if args.factor == 2 else refine_4x)(img, cfg, hook)
    elif args.method == "spline":
        out = spline_upsample2x(img, cfg.border)
        if args.factor == 4:
            out = spline_upsample2x(out, cfg.border)
    else:
        up = upsample2x if args.factor == 2 else upsample4x
        out = up(img, args.method, cfg.border)
    _check_finite(out.samples)
    save_image(out, args.output)
    if getattr(args, "verbose", False):
        print(f"{args.method} {img.width}x{img.height} -> {out.width}x{out.height} "
              f"in {time.perf_counter() - t0:.3f}s", file=sys.stderr)
    return EXIT_OK


# --- eval -----------------------------------------------------------------

def _parse_methods(text: str) -> list[str]:
    methods = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if not methods or bad:
        raise UsageError(f"unknown methods {bad}; choose from {', '.join(METHODS)}")
    return methods


def cmd_eval(args) -> int:
    methods = _parse_methods(args.methods)
    corpus = load_corpus(args.corpus)
    cfg = _load_config(args.config)
    protocol = _load_protocol(args.protocol)
    rows = evaluate_corpus(corpus, methods, cfg, protocol, threads=_threads())
    notes = [f"config: {cfg.to_json()}"] if "shearlet" in methods else []
    text = write_report(rows, args.out, protocol, notes)
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK


# --- sweep ----------------------------------------------------------------

def sweep_points(kind: str, grid: dict, base: RefineConfig, protocol: EvalProtocol):
    """Yield ``(labels, config, protocol)`` for every grid point of ``kind``."""
    if kind == "filters":
        for u, d in itertools.product(grid["upsamplers"], grid["downsamplers"]):
            if u not in UPSAMPLERS or d not in DOWNSAMPLERS:
                raise UsageError(f"invalid filter pair {u}/{d}")
            yield {"upsampler": u, "downsampler": d}, base.replace(upsampler=u, downsampler=d), protocol
    elif kind == "scales":
        for s in grid["scales"]:
            sc = ScaleConfig.parse(s)
            yield {"scales": str(sc)}, base.replace(scale_config=sc), protocol
    elif kind == "thresholds":
        for t, d in itertools.product(grid["thr_max"], grid["decay"]):
            sched = ThresholdSchedule(float(t), float(d), base.schedule.iterations)
            yield {"thr_max": f"{float(t):g}", "decay": f"{float(d):g}"}, base.replace(schedule=sched), protocol
    elif kind == "downsamplers":
        for f in grid["filters"]:
            if f not in TABLE3_FILTERS and f != "svc11":
                raise UsageError(f"unknown external filter {f!r}")
            p = EvalProtocol(f, protocol.crop_border, protocol.clamp_round)
            yield {"external_downsampler": f}, base, p
    else:
        raise UsageError(f"unknown sweep kind {kind!r}")


def cmd_sweep(args) -> int:
    grid = dict(DEFAULT_GRIDS[args.kind])
    if args.grid is not None:
        override = json.loads(Path(args.grid).read_text() if os.path.exists(args.grid) else args.grid)
        unknown = set(override) - set(grid)
        if unknown:
            raise UsageError(f"unknown grid keys for {args.kind}: {sorted(unknown)}")
        grid.update(override)
    if any(len(v) == 0 for v in grid.values()):
        raise UsageError("sweep grid must not be empty")
    base = _load_config(args.config)
    protocol = _load_protocol(args.protocol)
    # materialize first so invalid names fail before any work is done
    points = list(sweep_points(args.kind, grid, base, protocol))
    corpus = load_corpus(args.corpus)
    label_keys = list(points[0][0])
    buf = io.StringIO()
    buf.write(f"# sweep: {args.kind} images={len(corpus)} crop_border={protocol.crop_border}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(label_keys + ["mean_psnr_db", "mean_gain_vs_u8_db", "positive_images", "config_hash"])
    for labels, cfg, prot in points:
        rows = evaluate_corpus(corpus, ["shearlet"], cfg, prot, threads=_threads())
        s = summarize(rows)["shearlet"]
        pos = sum(r.gain_vs_u8_db > 0 for r in rows)
        w.writerow([labels[k] for k in label_keys]
                   + [f"{s['mean_psnr_db']:.4f}", f"{s['mean_gain_vs_u8_db']:.4f}", pos, rows[0].config_hash])
        log.info("%s gain %.4f dB", labels, s["mean_gain_vs_u8_db"])
    text = buf.getvalue()
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return EXIT_OK


# --- dump-bands / make-corpus -----------------------------------------------

def cmd_dump_bands(args) -> int:
    sys_ = build_system(args.width, args.height or args.width, ScaleConfig.parse(args.scales))
    paths = dump_bands(sys_, args.out)
    a, b = sys_.frame_bounds()
    log.info("wrote %d band plots; frame bounds %.4f .. %.4f", len(paths), a, b)
    return EXIT_OK


def cmd_make_corpus(args) -> int:
    from .corpus import write_corpus

    for p in write_corpus(args.out, args.size):
        log.info("wrote %s", p)
    return EXIT_OK


# --- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="shearinterp", description="2x / 4x image interpolation with shearlet refinement.")
    p.add_argument("--verbose", "-v", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", "-v", action="store_true", default=argparse.SUPPRESS,
                        help="log progress (for upscale: per-iteration thresholds and timing)")

    up = sub.add_parser("upscale", parents=[common], help="upscale one image")
    up.add_argument("--in", dest="input", required=True, help="input image (PGM or PNG)")
    up.add_argument("--out", dest="output", required=True, help="output path; .pgm/.pnm or PNG by suffix")
    up.add_argument("--factor", type=int, choices=(2, 4), default=2)
    up.add_argument("--method", choices=METHODS, default="shearlet")
    up.add_argument("--config", help="refinement config as JSON text or a JSON file")
    up.set_defaults(func=cmd_upscale)

    ev = sub.add_parser("eval", parents=[common], help="PSNR table over a directory of HR images")
    ev.add_argument("--corpus", required=True, help="directory of HR images")
    ev.add_argument("--methods", default="u4,spline,u8,u12,shearlet", help="comma-separated method names")
    ev.add_argument("--protocol", help='JSON, e.g. {"external_downsampler": "tab3_2", "crop_border": 8}')
    ev.add_argument("--config", help="refinement config as JSON text or a JSON file")
    ev.add_argument("--out", help="CSV output path (stdout if omitted)")
    ev.set_defaults(func=cmd_eval)

    sw = sub.add_parser("sweep", parents=[common], help="mean gain over a parameter grid")
    sw.add_argument("--kind", required=True, choices=sorted(DEFAULT_GRIDS))
    sw.add_argument("--corpus", required=True, help="directory of HR images")
    sw.add_argument("--grid", help="JSON overriding the default grid, e.g. {\"thr_max\": [100]}")
    sw.add_argument("--protocol", help="evaluation protocol JSON")
    sw.add_argument("--config", help="base refinement config JSON")
    sw.add_argument("--out", help="CSV output path (stdout if omitted)")
    sw.set_defaults(func=cmd_sweep)

    db = sub.add_parser("dump-bands", parents=[common], help="write band magnitude responses as PNG")
    db.add_argument("--width", type=int, default=256)
    db.add_argument("--height", type=int)
    db.add_argument("--scales", default="[0,3,4]", help="scale config literal, e.g. [0,3,4]")
    db.add_argument("--out", required=True, help="output directory")
    db.set_defaults(func=cmd_dump_bands)

    mc = sub.add_parser("make-corpus", parents=[common], help="write the bundled 16-image sample corpus")
    mc.add_argument("--out", required=True, help="output directory")
    mc.add_argument("--size", type=int, default=256, help="centre-crop edge length")
    mc.set_defaults(func=cmd_make_corpus)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    if args.verbose:
        log.setLevel(logging.INFO)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"shearinterp: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FloatingPointError as e:
        print(f"shearinterp: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ImageIOError, ValueError, KeyError, OSError) as e:
        print(f"shearinterp: error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
