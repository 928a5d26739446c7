import json
import subprocess
import sys

import numpy as np
import pytest

from shearinterp import cli
from shearinterp.core import Image, load_image, save_image
from shearinterp.refine import refine_2x
from shearinterp.resample import upsample2x


@pytest.fixture()
def lr_file(tmp_path):
    p = tmp_path / "a.pgm"
    save_image(Image(np.random.default_rng(0).uniform(0, 255, (20, 24))), p)
    return p


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    yy, xx = np.mgrid[:64, :64]
    for k in range(3):
        f = 128 + 70 * np.sin(0.15 * (k + 1) * xx + 0.07 * yy) * np.cos(0.05 * yy)
        save_image(Image(f), d / f"im{k}.png")
    (d / "notes.txt").write_text("not an image")
    return d


def test_upscale_shearlet_matches_library(tmp_path, lr_file):
    out = tmp_path / "b.pgm"
    assert cli.main(["upscale", "--in", str(lr_file), "--out", str(out), "--factor", "2", "--method", "shearlet"]) == 0
    expected = refine_2x(load_image(lr_file))
    got = load_image(out)
    assert got.shape == (40, 48)
    np.testing.assert_array_equal(got.samples, np.clip(np.floor(expected.samples + 0.5), 0, 255))


def test_upscale_fir_and_spline_4x(tmp_path, lr_file):
    out = tmp_path / "u8.png"
    assert cli.main(["upscale", "--in", str(lr_file), "--out", str(out), "--method", "u8"]) == 0
    ref = upsample2x(load_image(lr_file), "u8").samples
    np.testing.assert_array_equal(load_image(out).samples, np.clip(np.floor(ref + 0.5), 0, 255))
    out4 = tmp_path / "s4.pgm"
    assert cli.main(["upscale", "--in", str(lr_file), "--out", str(out4), "--factor", "4", "--method", "spline"]) == 0
    assert load_image(out4).shape == (80, 96)


def test_upscale_verbose_trace(tmp_path, lr_file, capsys):
    cfg = json.dumps({"iters": 3})
    assert cli.main(["upscale", "--in", str(lr_file), "--out", str(tmp_path / "v.pgm"), "--config", cfg, "-v"]) == 0
    err = capsys.readouterr().err
    assert err.count("iteration") == 3 and "threshold 36" in err


@pytest.mark.parametrize(
    "argv,code",
    [
        (["upscale", "--in", "x.pgm"], 1),
        (["upscale", "--in", "x.pgm", "--out", "y.pgm", "--factor", "3"], 1),
        (["frobnicate"], 1),
        (["eval", "--corpus", ".", "--methods", "nedi"], 1),
    ],
)
def test_usage_errors(argv, code):
    with pytest.raises(SystemExit) as e:
        rc = cli.main(argv)
        raise SystemExit(rc)
    assert e.value.code == code


def test_data_errors(tmp_path, lr_file):
    assert cli.main(["upscale", "--in", str(tmp_path / "missing.pgm"), "--out", str(tmp_path / "o.pgm")]) == 2
    assert cli.main(["upscale", "--in", str(lr_file), "--out", str(tmp_path / "o.pgm"), "--config", '{"iters": -2}']) == 2
    small = tmp_path / "s.pgm"
    save_image(Image(np.zeros((8, 8))), small)
    assert cli.main(["upscale", "--in", str(small), "--out", str(tmp_path / "o.pgm")]) == 2
    empty = tmp_path / "empty"
    empty.mkdir()
    assert cli.main(["eval", "--corpus", str(empty)]) == 2


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_numeric_failure_exit_code(tmp_path, lr_file, monkeypatch):
    import shearinterp.refine as r

    monkeypatch.setattr(r, "_sparse", lambda a, *args: np.full_like(a, np.inf))
    assert cli.main(["upscale", "--in", str(lr_file), "--out", str(tmp_path / "o.pgm")]) == 3


def test_eval_u8_only_gains_zero(corpus_dir, tmp_path):
    out = tmp_path / "r.csv"
    assert cli.main(["eval", "--corpus", str(corpus_dir), "--methods", "u8", "--out", str(out)]) == 0
    rows = [l.split(",") for l in out.read_text().splitlines() if not l.startswith("#")][1:]
    assert [r[0] for r in rows] == ["im0", "im1", "im2", "AVERAGE"]
    assert all(float(r[3]) == 0.0 for r in rows)


def test_eval_summary_and_protocol(corpus_dir, tmp_path):
    out = tmp_path / "t.csv"
    argv = ["eval", "--corpus", str(corpus_dir), "--methods", "u4,spline,u8,u12,shearlet",
            "--protocol", '{"external_downsampler": "tab3_2"}', "--out", str(out)]
    assert cli.main(argv) == 0
    text = out.read_text()
    assert "external_downsampler=tab3_2" in text.splitlines()[0]
    assert sum(l.startswith("AVERAGE,") for l in text.splitlines()) == 5
    assert sum(l.startswith("PSNR_DIFF,") for l in text.splitlines()) == 5


def test_sweep_single_threshold_point_equals_eval(corpus_dir, tmp_path):
    sw, ev = tmp_path / "sw.csv", tmp_path / "ev.csv"
    assert cli.main(["sweep", "--kind", "thresholds", "--corpus", str(corpus_dir),
                     "--grid", '{"thr_max": [100], "decay": [0.6]}', "--out", str(sw)]) == 0
    assert cli.main(["eval", "--corpus", str(corpus_dir), "--methods", "u8,shearlet", "--out", str(ev)]) == 0
    sweep_row = sw.read_text().splitlines()[2].split(",")
    avg = [l.split(",") for l in ev.read_text().splitlines() if l.startswith("AVERAGE,shearlet")][0]
    assert sweep_row[:2] == ["100", "0.6"]
    assert sweep_row[2:4] == avg[2:4]
    assert sweep_row[5] == avg[4]


def test_sweep_filters_grid_size(corpus_dir, tmp_path):
    out = tmp_path / "f.csv"
    grid = json.dumps({"upsamplers": ["u2", "u6"], "downsamplers": ["d3", "d13"]})
    assert cli.main(["sweep", "--kind", "filters", "--corpus", str(corpus_dir), "--grid", grid, "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[1].startswith("upsampler,downsampler,")
    assert len(lines) == 2 + 4
    assert len(list(cli.sweep_points("filters", cli.DEFAULT_GRIDS["filters"], cli.RefineConfig(), cli.EvalProtocol()))) == 25


def test_sweep_invalid_grid(corpus_dir):
    bad = json.dumps({"upsamplers": ["u5"]})
    assert cli.main(["sweep", "--kind", "filters", "--corpus", str(corpus_dir), "--grid", bad]) == 1
    assert cli.main(["sweep", "--kind", "downsamplers", "--corpus", str(corpus_dir), "--grid", '{"filters": []}']) == 1
    assert cli.main(["sweep", "--kind", "scales", "--corpus", str(corpus_dir), "--grid", '{"depth": [1]}']) == 1


def test_default_grids():
    g = cli.DEFAULT_GRIDS
    assert len(g["thresholds"]["thr_max"]) * len(g["thresholds"]["decay"]) == 30
    assert [0, 3, 4] in g["scales"]["scales"] and [0, 3] in g["scales"]["scales"]
    assert g["downsamplers"]["filters"] == [f"tab3_{i}" for i in range(1, 7)]


def test_dump_bands(tmp_path):
    assert cli.main(["dump-bands", "--width", "64", "--scales", "[0,3,4]", "--out", str(tmp_path / "b")]) == 0
    assert len(list((tmp_path / "b").glob("*.png"))) == 25
    assert cli.main(["dump-bands", "--width", "8", "--out", str(tmp_path / "c")]) == 2


def test_help_lists_commands():
    r = subprocess.run([sys.executable, "-m", "shearinterp.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    for cmd in ("upscale", "eval", "sweep", "dump-bands"):
        assert cmd in r.stdout
