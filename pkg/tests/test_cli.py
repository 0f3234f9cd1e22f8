import io
import json
import shutil
import subprocess
import sys

import pytest

from qkmirror.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, main


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


def run_json(*argv):
    code, text = run(*argv)
    return code, json.loads(text)


def test_validate_blowup(models_dir):
    code, doc = run_json("validate", str(models_dir / "blp3.toml"))
    assert code == EXIT_OK
    assert doc["compact"] and doc["smooth"] and doc["fano"]
    assert doc["c1"] == [2, 2]
    assert doc["failure_witness"] is None
    assert doc["config"]["command"] == "validate"


def test_validate_reports_singular_model(tmp_path):
    path = tmp_path / "weighted.toml"
    path.write_text("matrix = [[1, 1, 2]]\n")
    code, doc = run_json("validate", str(path))
    assert code == EXIT_FAIL
    assert doc["compact"] and not doc["smooth"]
    assert "determinant 2" in doc["failure_witness"]


def test_validate_reports_noncompact_model(tmp_path):
    path = tmp_path / "open.toml"
    path.write_text("matrix = [[1, 1, -1]]\n")
    code, doc = run_json("validate", str(path))
    assert code == EXIT_FAIL
    assert not doc["compact"]


def test_normalize_file(models_dir):
    code, doc = run_json("normalize", str(models_dir / "f1.toml"))
    assert code == EXIT_OK
    assert (doc["N"], doc["a"], doc["fano"], doc["dim"]) == (2, [1], True, 2)


@pytest.mark.parametrize("cls,expected", [("p2^2", "1"), ("p1*p2", "1"), ("p1^2", "0")])
def test_intersect_hirzebruch(cls, expected):
    code, doc = run_json("intersect", "--family", "N=2,a=1", "--class", cls)
    assert code == EXIT_OK
    assert doc["value"] == expected


def test_euler_of_structure_sheaf():
    code, doc = run_json("euler", "--family", "N=2,a=1", "--E", "0,0", "--F", "0,0")
    assert code == EXIT_OK
    assert doc["value"] == "1"


def test_compare_kth_passes():
    code, doc = run_json("compare-kth", "--family", "N=2,a=0", "--q", "2", "--b1", "0", "--b2", "0", "--tol", "1e-8")
    assert code == EXIT_OK
    assert doc["passed"]
    assert doc["report"]["rel_err"] < 1e-8
    assert doc["config"]["tol"] == 1e-8


def test_compare_coh_passes():
    code, doc = run_json("compare-coh", "--family", "N=2,a=0", "--z", "1")
    assert code == EXIT_OK
    assert doc["report"]["rel_err"] < 1e-6


def test_env_tolerance_override(monkeypatch):
    monkeypatch.setenv("QKMIRROR_TOL", "1e-30")
    code, doc = run_json("compare-kth", "--family", "N=2,a=0", "--q", "2")
    assert code == EXIT_FAIL
    assert doc["config"]["tol"] == 1e-30
    assert doc["config"]["QKMIRROR_TOL"] == "1e-30"


def test_env_tolerance_must_be_numeric(monkeypatch):
    monkeypatch.setenv("QKMIRROR_TOL", "tight")
    code, _ = run("compare-kth", "--family", "N=2,a=0", "--q", "2")
    assert code == EXIT_CONFIG


@pytest.mark.parametrize("argv", [
    ["compare-kth", "--family", "N=2,a=2", "--q", "2"],
    ["compare-kth", "--family", "N=two", "--q", "2"],
    ["intersect", "--family", "N=2,a=1", "--class", "p9"],
    ["validate"],
    ["no-such-command"],
])
def test_configuration_errors(argv, models_dir):
    code, _ = run(*argv)
    assert code == EXIT_CONFIG


def test_file_and_family_conflict(models_dir):
    code, _ = run("validate", str(models_dir / "p1.toml"), "--family", "N=2,a=0")
    assert code == EXIT_CONFIG


def test_qde_check_exact():
    code, doc = run_json("qde-check", "--family", "N=2,a=1", "--q", "2,5/2", "--degree", "4")
    assert code == EXIT_OK
    assert all(r["zero"] for r in doc["results"])


def test_ode_check_exact():
    code, doc = run_json("ode-check", "--family", "N=2,a=1", "--z", "1", "--degree", "4")
    assert code == EXIT_OK


def test_qfun_eval():
    code, doc = run_json("qfun", "eval", "gamma_q", "--x", "3", "--q", "2")
    assert code == EXIT_OK
    assert doc["value"] == pytest.approx(0.375, rel=1e-14)


def test_csv_header(tmp_path):
    path = tmp_path / "kth.csv"
    code, _ = run("compare-kth", "--family", "N=2,a=0", "--q", "2", "--emit-csv", str(path))
    assert code == EXIT_OK
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# ")
    assert json.loads(lines[0][2:])["command"] == "compare-kth"
    assert lines[1] == "q,b1,b2,lhs,rhs,relerr"
    assert len(lines) == 3


def test_confluence_csv_to_stream():
    code, text = run("confluence", "--family", "N=2,a=0", "--steps", "2", "--degree", "2")
    assert code == EXIT_OK
    lines = text.splitlines()
    assert lines[0].startswith("# ")
    assert lines[1] == "q,d,basis,value,target,error"


def test_output_is_deterministic():
    argv = ["qmellin-check", "--family", "N=2,a=1", "--random", "4", "--seed", "7"]
    first = run(*argv)
    assert first == run(*argv)
    _, text = first
    assert "elapsed" not in text


def test_parallel_does_not_change_results():
    base = ["qde-check", "--family", "N=3,a=1", "--q", "2,3", "--degree", "3"]
    serial = json.loads(run(*base, "--parallel", "1")[1])
    pooled = json.loads(run(*base, "--parallel", "2")[1])
    assert serial["results"] == pooled["results"]
    assert serial["passed"] == pooled["passed"]


def test_console_script(models_dir):
    exe = shutil.which("qkmirror")
    argv = [exe] if exe else [sys.executable, "-m", "qkmirror.cli"]
    proc = subprocess.run(argv + ["validate", str(models_dir / "p1.toml")], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["fano"] is True
