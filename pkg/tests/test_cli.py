import csv
import math

import numpy as np
import pytest

from hybridmimo.cli import main
from hybridmimo.netmap import noise_power_dbm

TRIVIAL = """[geometry]
columns = 1
rows = 1
grid_spacing = 5000
grid_heights = 1.5
min_horizontal_distance = 0
[analysis]
rank_budget = 1
rf_chains = 1
[network]
sites = 1
sectors_per_site = 1
map_radius = 1000
map_spacing = 100
"""


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_cfg(tmp_path, text, name="cfg.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


@pytest.fixture(scope="module")
def default_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    assert main(["all", "--out", str(out)]) == 0
    return out


def test_svd_report_defaults(default_run):
    summary = (default_run / "svd_summary.txt").read_text()
    assert "fraction_rank_4" in summary and "fraction_rank_8" in summary
    vals = dict(line.split(" = ") for line in summary.splitlines())
    assert 0.45 <= float(vals["fraction_rank_4"]) <= 0.75
    assert 0.70 <= float(vals["fraction_rank_8"]) <= 0.95
    prof = read_csv(default_run / "cumulative_power.csv")
    assert len(prof) == 48 and float(prof[-1]["fraction"]) == 1.0
    assert len(read_csv(default_run / "singular_values.csv")) == 48


def test_svd_report_trivial(tmp_path):
    out = tmp_path / "o"
    assert main(["svd-report", "--config", write_cfg(tmp_path, TRIVIAL), "--out", str(out)]) == 0
    assert len(read_csv(out / "singular_values.csv")) == 1
    assert [float(r["fraction"]) for r in read_csv(out / "cumulative_power.csv")] == [1.0]


def test_equivalence_defaults_pass(default_run, capsys):
    summary = read_csv(default_run / "equivalence_summary.csv")
    assert [r["status"] for r in summary] == ["PASS"]
    res = read_csv(default_run / "equivalence_residuals.csv")
    assert len(res) == 25
    assert max(float(r["residual"]) for r in res) < 1e-10
    assert read_csv(default_run / "subframe_schedule.csv") == [
        {"subframe": "0", "beam": str(b)} for b in range(4)]


def test_equivalence_negative_control(tmp_path, capsys):
    out = tmp_path / "neg"
    assert main(["equivalence", "--out", str(out), "--perturb-beams"]) == 1
    assert "FAIL" in capsys.readouterr().out
    res = read_csv(out / "equivalence_residuals.csv")
    assert min(float(r["residual"]) for r in res) > 1e-6


def test_equivalence_rank_sweep(tmp_path):
    cfg = write_cfg(tmp_path, "[analysis]\nequivalence_ranks = 1, 2, 3, 4, 5, 6, 7, 8\nrf_chains = 4\n")
    out = tmp_path / "sweep"
    assert main(["equivalence", "--config", cfg, "--out", str(out)]) == 0
    summary = read_csv(out / "equivalence_summary.csv")
    assert [int(r["rank"]) for r in summary] == list(range(1, 9))
    assert all(r["status"] == "PASS" for r in summary)
    assert len(read_csv(out / "subframe_schedule.csv")) == 8


def test_patterns_files(default_run):
    for b in range(1, 5):
        pat = default_run / f"pattern_beam{b}.csv"
        emap = default_run / f"element_power_beam{b}.csv"
        assert pat.exists() and emap.exists()
        rows = read_csv(emap)
        assert len(rows) == 48
        # independent summation of the exported unnormalized powers
        assert abs(math.fsum(float(r["power"]) for r in rows) - 1.0) <= 1e-12
    assert not (default_run / "pattern_beam5.csv").exists()


def test_patterns_rank_one(tmp_path):
    out = tmp_path / "p1"
    assert main(["patterns", "--out", str(out), "--rank", "1"]) == 0
    names = sorted(p.name for p in out.iterdir() if p.name.startswith(("pattern_", "element_")))
    assert names == ["element_power_beam1.csv", "pattern_beam1.csv"]


def test_sinr_map_defaults(default_run):
    rows = read_csv(default_run / "sinr_map.csv")
    n = 2500 // 50
    assert len(rows) == 3 * n * n + 3 * n + 1
    assert set(rows[0]) == {"x", "y", "serving_sector", "sinr_dB"}


def test_sinr_map_single_site_is_snr(tmp_path):
    out = tmp_path / "s1"
    assert main(["sinr-map", "--config", write_cfg(tmp_path, TRIVIAL), "--out", str(out)]) == 0
    lam = 299_792_458.0 / 2e9
    for r in read_csv(out / "sinr_map.csv"):
        x, y = float(r["x"]), float(r["y"])
        horiz = math.hypot(x, y)
        az = math.degrees(math.atan2(y, x))
        el = math.degrees(math.atan2(1.5 - 32.0, horiz)) + 6.0
        gain = 15.0 - min(12 * (az / 65) ** 2 + 12 * (el / 10) ** 2, 30.0)
        d = math.hypot(horiz, 30.5)
        pl = 20 * math.log10(4 * math.pi / lam) + 37.6 * math.log10(d)
        snr = 10 * math.log10(20e3) + gain - pl - noise_power_dbm(5e6, 9.0)
        assert float(r["sinr_dB"]) == pytest.approx(snr, abs=1e-9)


def test_sinr_map_rotational_symmetry(default_run):
    rows = read_csv(default_run / "sinr_map.csv")
    pts = np.array([[float(r["x"]), float(r["y"])] for r in rows])
    vals = np.array([float(r["sinr_dB"]) for r in rows])
    c, s = math.cos(math.radians(120)), math.sin(math.radians(120))
    rot = pts @ np.array([[c, -s], [s, c]]).T
    # match rotated points back onto the lattice through rounded keys
    index = {(round(x, 3), round(y, 3)): i for i, (x, y) in enumerate(pts)}
    matched = [index[(round(x, 3), round(y, 3))] for x, y in rot]
    assert np.abs(vals - vals[matched]).max() < 1e-9


@pytest.mark.parametrize("command", ["svd-report", "equivalence", "patterns", "sinr-map"])
def test_rerun_is_byte_identical(tmp_path, command):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main([command, "--out", str(a), "--seed", "5"]) == 0
    assert main([command, "--out", str(b), "--seed", "5"]) == 0
    files = sorted(p.name for p in a.iterdir())
    assert files == sorted(p.name for p in b.iterdir())
    for name in files:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_bad_config_exit_code(tmp_path, capsys):
    assert main(["svd-report", "--config", write_cfg(tmp_path, "nonsense_key = 3\n")]) == 2
    assert "nonsense_key" in capsys.readouterr().err


def test_show_config_roundtrip(capsys):
    assert main(["show-config", "--rank", "6"]) == 0
    from hybridmimo.config import parse_config
    assert parse_config(capsys.readouterr().out).rank_budget == 6
