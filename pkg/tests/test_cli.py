import csv
import json
import os
import subprocess
import sys

import pytest

from higherindex import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_fredholm_demo_example(capsys, tmp_path):
    code, out = run(capsys, "fredholm-demo", "--p", "5", "--q", "3", "--seed", "3", "--trials", "5",
                    "--out", str(tmp_path))
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert doc["config"] == {"p": 5, "q": 3, "seed": 3, "trials": 5}
    assert doc["tolerances"]["fredholm-demo.mckean_singer_drift"] == 1e-9
    with open(tmp_path / "fredholm-demo.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:4] == ["p", "q", "oracle_index", "CS"]
    for r in rows[1:]:
        assert {round(float(x)) for x in r[3:7]} == {2}
    assert json.loads((tmp_path / "fredholm-demo.json").read_text()) == doc


def test_growth_profile_example(capsys, tmp_path):
    code, out = run(capsys, "growth-profile", "--model", "hyperbolic", "--degree", "2", "--radii", "1:10",
                    "--seed", "7", "--samples", "40", "--out", str(tmp_path))
    assert code == 0
    with open(tmp_path / "growth-profile.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 10
    assert all(float(r["max_abs"]) <= 3.141592653589793 for r in rows)


def test_morita_example_small(capsys):
    code, out = run(capsys, "morita-check", "--n", "2", "--box", "6", "--slice", "3", "--seed", "1")
    doc = json.loads(out)
    assert code == 0
    for pair in doc["reports"][0]["results"]["pairings"]:
        k, g = pair["kernel_side"], pair["group_side"]
        assert abs(k["re"] - g["re"]) < 1e-8 and abs(k["im"] - g["im"]) < 1e-8


def test_deterministic_and_config_hash(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"samples": 20, "model": "hyperbolic", "order": 30}))
    _, out1 = run(capsys, "cocycle-check", "--config", str(cfg))
    _, out2 = run(capsys, "cocycle-check", "--config", str(cfg))
    assert out1 == out2
    d1 = json.loads(out1)
    assert d1["config"]["samples"] == 20 and d1["config"]["model"] == "hyperbolic"
    _, out3 = run(capsys, "cocycle-check", "--config", str(cfg), "--samples", "10")
    d3 = json.loads(out3)
    assert d3["config"]["samples"] == 10 and d3["config_hash"] != d1["config_hash"]


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "index-rhs", "--bogus")[0] == 2
    assert run(capsys, "morita-check", "--n", "3")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"nope": 1}')
    code, out = run(capsys, "index-rhs", "--config", str(bad))
    assert code == 2 and json.loads(out)["error"] == "ConfigError"
    bad.write_text("{not json")
    assert run(capsys, "index-rhs", "--config", str(bad))[0] == 2
    # a numeric domain error: cut-off support too small to normalize
    code, out = run(capsys, "vanest-roundtrip", "--eps", "1e-300")
    assert code == 3 and json.loads(out)["exit_code"] == 3


def test_failed_check_exits_one(capsys):
    # a quadrature order far too low for vertices at distance 10 breaks Gauss-Bonnet agreement
    code, out = run(capsys, "cocycle-eval", "--samples", "20", "--order", "2")
    assert code == 1 and json.loads(out)["passed"] is False


@pytest.mark.parametrize("cmd", ["simplex-volume", "index-rhs", "vanest-roundtrip", "conv-pairing"])
def test_other_subcommands_pass(capsys, cmd):
    code, out = run(capsys, cmd)
    assert code == 0, out


def test_parse_range():
    assert cli.parse_range("1:4") == [1.0, 2.0, 3.0, 4.0]
    assert cli.parse_range("0:1:0.5") == [0.0, 0.5, 1.0]
    assert cli.parse_range("2,3.5") == [2.0, 3.5]


def test_console_script_and_workers(tmp_path):
    env = dict(os.environ, HIGHERINDEX_WORKERS="2")
    r = subprocess.run([sys.executable, "-m", "higherindex.cli", "fredholm-demo", "--trials", "4"],
                       capture_output=True, text=True, env=env)
    assert r.returncode == 0
    assert json.loads(r.stdout)["workers"] == 2


def test_backend_flag_selects_numpy():
    env = dict(os.environ, HIGHERINDEX_BACKEND="numpy")
    r = subprocess.run([sys.executable, "-c", "import higherindex; print(higherindex.BACKEND)"],
                       capture_output=True, text=True, env=env)
    assert r.stdout.strip() == "numpy"
    env["HIGHERINDEX_BACKEND"] = "fortran"
    r = subprocess.run([sys.executable, "-c", "import higherindex"], capture_output=True, text=True, env=env)
    assert r.returncode != 0


def test_runs_without_numba():
    code = ("import sys; sys.modules['numba'] = None\n"
            "import numpy as np, higherindex\n"
            "from higherindex import conv\n"
            "assert not higherindex.HAVE_NUMBA and higherindex.BACKEND == 'numpy'\n"
            "g = conv.LatticeGroup(2, 0.5, 3)\n"
            "assert np.allclose(conv.convolve(g.unit(), g.unit()).values, g.unit().values)\n")
    r = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
