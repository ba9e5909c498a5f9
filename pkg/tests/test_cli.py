import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from arrows.cli import SCALING_COLUMNS, TRACE_COLUMNS, fmt, main, parse_n_grid, parse_seeds

GOLDEN = Path(__file__).parent / "golden"


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_parsers():
    assert parse_n_grid("2^10..2^13") == [1024, 2048, 4096, 8192]
    assert parse_n_grid("100,2^3") == [100, 8]
    assert parse_seeds("0:3,7") == [0, 1, 2, 7]
    assert fmt(True) == "1" and fmt(np.False_) == "0"
    assert float(fmt(0.1 + 0.2)) == 0.1 + 0.2


@pytest.mark.filterwarnings("ignore:sigma = 0")
def test_trial_constant_noiseless(tmp_path):
    rc = main(["--mode", "trial", "--algo", "arrows", "--gen", "constant", "--n", "8",
               "--sigma", "0", "--out-dir", str(tmp_path)])
    assert rc == 0
    rows = read_csv(tmp_path / "trace.csv")
    assert rows[0] == TRACE_COLUMNS
    assert len(rows) == 9
    for r in rows[1:]:
        assert [float(v) for v in r[1:]] == [0.0] * 5
    s = json.loads((tmp_path / "summary.json").read_text())
    assert s["bins"] == 1 and s["total_regret"] == 0.0
    assert s["config"]["n"] == 8 and s["config"]["sigma"] == 0.0


def test_trial_ogd_echoes_batch_size(tmp_path):
    rc = main(["--mode", "trial", "--algo", "ogd-tv", "--gen", "linear", "--gen-param", "slope_total=1",
               "--n", "10000", "--sigma", "1", "--out-dir", str(tmp_path)])
    assert rc == 0
    s = json.loads((tmp_path / "summary.json").read_text())
    assert s["batch_size"] == 303
    assert s["truth"]["tv"] == pytest.approx(1.0)


def test_trial_reproduces_golden_step(tmp_path):
    gold = json.loads((GOLDEN / "step_n2048_seed0.json").read_text())
    rc = main(["--mode", "trial", "--algo", "arrows", "--gen", "step", "--n", "2048",
               "--sigma", "1", "--seeds", "0", "--out-dir", str(tmp_path)])
    assert rc == 0
    rows = read_csv(tmp_path / "trace.csv")[1:]
    assert [int(r[0]) for r in rows if r[5] == "1"] == gold["restart_times"]
    s = json.loads((tmp_path / "summary.json").read_text())
    assert s["total_regret"] == pytest.approx(gold["total_regret"], rel=1e-10)


def test_sweep_cardinality_and_slopes(tmp_path):
    rc = main(["--mode", "sweep", "--algo", "arrows,ogd-tv,ma-tv", "--gen", "hybrid",
               "--n-grid", "2^10..2^13", "--seeds", "0,1", "--out-dir", str(tmp_path)])
    assert rc == 0
    rows = read_csv(tmp_path / "scaling.csv")
    assert rows[0] == SCALING_COLUMNS
    assert len(rows) - 1 == 4 * 2 * 3
    # deterministic (n, seed) order
    keys = [(int(r[1]), int(r[2])) for r in rows[1:]]
    assert keys == sorted(keys)
    rep = json.loads((tmp_path / "report.json").read_text())
    for algo in ("arrows", "ogd-tv", "ma-tv"):
        assert isinstance(rep["algos"][algo]["slope"], float)
        assert [r["n"] for r in rep["algos"][algo]["per_n"]] == [1024, 2048, 4096, 8192]


def test_outputs_bit_identical(tmp_path):
    args = ["--mode", "sweep", "--algo", "arrows,ma-tv", "--gen", "doppler", "--n-grid", "256,512,1024",
            "--seeds", "0:2", "--no-timing"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out-dir", str(a)]) == 0
    assert main(args + ["--workers", "2", "--out-dir", str(b)]) == 0
    assert (a / "scaling.csv").read_bytes() == (b / "scaling.csv").read_bytes()
    ra = json.loads((a / "report.json").read_text())
    rb = json.loads((b / "report.json").read_text())
    assert ra["algos"] == rb["algos"]

    # same out dir so the echoed config matches too
    t = ["--mode", "trial", "--gen", "hybrid", "--n", "500", "--seeds", "3", "--no-timing", "--out-dir", str(a)]
    assert main(t) == 0
    first = {f: (a / f).read_bytes() for f in ("trace.csv", "summary.json")}
    assert main(t) == 0
    for f, blob in first.items():
        assert (a / f).read_bytes() == blob


def test_estimate_sigma_from_input(tmp_path, capsys):
    y = np.random.default_rng(0).normal(size=4096) + 2.0
    path = tmp_path / "y.txt"
    path.write_text("\n".join(fmt(v) for v in y) + "\n")
    assert main(["--mode", "estimate-sigma", "--input", str(path), "--out-dir", str(tmp_path)]) == 0
    sigma_hat = float(capsys.readouterr().out.strip())
    assert 0.9 <= sigma_hat <= 1.1
    assert json.loads((tmp_path / "sigma.json").read_text())["sigma_hat"] == sigma_hat


def test_estimate_sigma_csv_with_header(tmp_path, capsys):
    path = tmp_path / "trace.csv"
    path.write_text("t,y\n1,0\n2,1\n3,0\n4,1\n")
    assert main(["--mode", "estimate-sigma", "--input", str(path)]) == 0
    assert float(capsys.readouterr().out) > 0


def test_estimate_sigma_too_short(tmp_path):
    path = tmp_path / "y.txt"
    path.write_text("1.0\n")
    assert main(["--mode", "estimate-sigma", "--input", str(path)]) == 1


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"mode": "trial", "algo": ["ma-tv"], "gen": "step", "n": 64,
                               "sigma": 0.5, "seeds": [4]}))
    assert main(["--config", str(cfg), "--n", "32", "--out-dir", str(tmp_path)]) == 0
    s = json.loads((tmp_path / "summary.json").read_text())
    assert s["n"] == 32 and s["algo"] == "ma-tv" and s["seed"] == 4 and s["config"]["sigma"] == 0.5


@pytest.mark.parametrize("argv", [
    ["--mode", "trial", "--n", "10"],  # no out dir
    ["--mode", "trial", "--out-dir", "x"],  # no n
    ["--mode", "trial", "--n", "10", "--seeds", "0,1", "--out-dir", "x"],
    ["--mode", "sweep", "--n-grid", "8,16", "--out-dir", "x"],
    ["--mode", "sweep", "--n-grid", "64,32,128", "--out-dir", "x"],
    ["--mode", "trial", "--n", "10", "--sigma", "-1", "--out-dir", "x"],
    ["--mode", "trial", "--n", "10", "--algo", "kalman", "--out-dir", "x"],
    ["--mode", "trial", "--n", "10", "--gen-param", "bogus=1", "--out-dir", "x"],
])
def test_config_errors_exit_nonzero(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 2
    assert not (tmp_path / "x").exists()


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["--mode", "trial", "--n", "8", "--out-dir", str(blocker / "sub")]) == 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "arrows", "--mode", "trial", "--gen", "linear",
                           "--n", "16", "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "summary.json").exists()
