import json
import subprocess
import sys

import pytest

from osculum.cli import compare_methods, main, run
from osculum.manifolds import graph_pair


def run_cli(args, capsys, stdin=None, monkeypatch=None):
    if stdin is not None:
        import io

        monkeypatch.setattr(sys, "stdin", io.StringIO(json.dumps(stdin)))
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sep_exp_colley_kennedy_passes(capsys):
    code, out, _ = run_cli(["sep-exp", "--catalog", "colley_kennedy", "--param", "N=2"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["verdict"] == "PASS"
    assert abs(rep["result"]["fit"]["alpha"] - 2.5) <= 0.05
    assert rep["result"]["symbolic_exponent"] == "5/2"


def test_identical_patches(capsys):
    code, out, _ = run_cli(["tangency", "--F", "x^2", "--Ft", "x^2", "--k-max", "9"], capsys)
    assert code == 0
    assert json.loads(out)["result"]["order"] == ">=9"


def test_tworzewski_jobs(capsys, monkeypatch):
    manifest = {
        "jobs": [
            {"job": "tangency", "catalog": {"name": "tworzewski", "d": 3, "s": 5}},
            {"job": "sep-exp", "catalog": {"name": "tworzewski", "d": 3, "s": 5}},
        ]
    }
    code, out, _ = run_cli(["run"], capsys, manifest, monkeypatch)
    jobs = json.loads(out)["jobs"]
    assert code == 0
    assert jobs[0]["result"]["order"] == 2
    assert abs(jobs[1]["result"]["fit"]["alpha"] - 3.0) <= 0.05


def test_failed_verdict_exits_two(capsys, monkeypatch):
    # a declared exponent that the fit cannot reach
    manifest = {"job": "sep-exp", "catalog": {"name": "cardioid"}, "expect": {"exponent": "2"}}
    code, out, _ = run_cli(["run"], capsys, manifest, monkeypatch)
    assert code == 2
    assert json.loads(out)["verdict"] == "FAIL"


def test_parse_error_exits_one(capsys):
    code, out, _ = run_cli(["tangency", "--F", "x^(5/2)", "--Ft", "x"], capsys)
    assert code == 1
    assert "position 1" in json.loads(out)["error"]


def test_unknown_job_kind(capsys, monkeypatch):
    code, out, _ = run_cli(["run"], capsys, {"job": "nonsense"}, monkeypatch)
    assert code == 1


def test_out_writes_csv_beside_report(tmp_path, capsys):
    out = tmp_path / "ck.json"
    code, _, _ = run_cli(["sep-exp", "--catalog", "quatrefoil", "--out", str(out)], capsys)
    assert code == 0
    assert json.loads(out.read_text())["verdict"] == "PASS"
    csv = (tmp_path / "ck.samples.csv").read_text().splitlines()
    assert csv[0] == "rho,distance"
    assert len(csv) == 11


def test_compare_methods_examples():
    assert compare_methods(graph_pair("x^2", "x^2 + x^5"), n_dirs=4, n_curves=2)["values"] == {
        "taylor": 4,
        "minimax": 4,
        "grassmann": 4,
    }
    ck = compare_methods(graph_pair("x^2 - abs(x)^(5/2)", "x^2 + abs(x)^(5/2)"), n_dirs=2, n_curves=2)
    assert ck["status"] == "caveat"
    assert ck["values"] == {"taylor": 2, "minimax": ">=2", "grassmann": 2}


def test_compare_tworzewski(capsys):
    code, out, _ = run_cli(["compare", "--catalog", "tworzewski", "--param", "d=3", "--param", "s=5"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["result"]["values"] == {"taylor": 2, "minimax": 2, "grassmann": 2}


def test_contact_job(capsys, monkeypatch):
    manifest = {"job": "contact", "random_surfaces": {"n": 5, "seed": 1}, "geiges": True, "expect": {"verdict": "PASS"}}
    code, out, _ = run_cli(["run"], capsys, manifest, monkeypatch)
    assert code == 0
    assert json.loads(out)["result"]["verdict"] == "PASS"


def test_grassmann_job_reports_chart_points(capsys):
    code, out, _ = run_cli(["grassmann", "--F", "x^2", "--Ft", "x^2+x^5"], capsys)
    assert json.loads(out)["result"]["max_equal_lift"] == 4


def test_module_entry_point_is_deterministic():
    cmd = [sys.executable, "-m", "osculum", "catalog", "--catalog", "colley_kennedy", "--param", "N=3"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b
    assert json.loads(a)["verdict"] == "PASS"
