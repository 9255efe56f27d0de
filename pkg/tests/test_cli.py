import json
import subprocess
import sys

import pytest

from heralded.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_herald_reference_point(capsys):
    code, out, _ = run(capsys, "herald", "--r-sq", "0.0265654", "--t", "0.0220391", "--a1", "0.70710678", "--p", "0")
    assert code == 0
    data = json.loads(out)
    assert abs(data["negativity"] - 1) < 1e-3
    assert abs(data["probability"] - 0.999404) < 1e-3


@pytest.mark.parametrize("argv,name", [
    (["herald", "--r-sq", "0.1", "--t", "0.5", "--a1", "1.0"], "DegenerateDelocalization"),
    (["herald", "--r-sq", "0.1", "--t", "0.5", "--p", "-1"], "InvalidParameter"),
    (["herald", "--r-sq", "-1", "--t", "0.5"], "InvalidParameter"),
    (["herald", "--r-sq", "0.1", "--t", "1.0"], "InvalidParameter"),
    (["herald", "--r-sq", "0.1", "--t", "0.5", "--a0", "0.5", "--a1", "0.5"], "NormViolation"),
    (["herald", "--r-sq", "2.9", "--t", "0.5"], "CutoffOverflow"),
])
def test_validation_exit_two(capsys, argv, name):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == "" and name in err


def test_argparse_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["herald", "--t", "0.5"])
    assert exc.value.code == 2
    code, _, _ = run(capsys, "herald", "--r-sq", "0.1", "--t", "0.5", "--format", "csv")
    assert code == 2


def test_numerical_failure_exit_one(capsys):
    code, out, err = run(capsys, "solve", "--a1", "0.70710678")
    assert code == 1 and "NoRootInBracket" in err and out == ""


def test_distribution_output(capsys):
    code, out, _ = run(capsys, "herald", "--r-sq", "0.3", "--t", "0.5", "--p-max", "3")
    assert code == 0 and [r["p"] for r in json.loads(out)] == [0, 1, 2, 3]


def test_scan_csv_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["scan", "--steps", "12", "9", "-o", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_bytes().decode()
    assert "\r" not in text and len(text.splitlines()) == 1 + 12 * 9


def test_scan_json(capsys):
    code, out, _ = run(capsys, "scan", "--steps", "3", "3", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["metadata"]["rows"] == 9 and len(data["rows"]) == 9


def test_solve_output(capsys):
    code, out, _ = run(capsys, "solve", "--a1", "0.741004")
    pts = json.loads(out)
    assert code == 0 and pts and all(abs(p["negativity"] - 1) < 1e-9 for p in pts)


def test_verify_and_emit_config(tmp_path):
    out, cfg = tmp_path / "v.json", tmp_path / "cfg.json"
    assert main(["verify", "-o", str(out), "--emit-config", str(cfg)]) == 0
    report = json.loads(out.read_text())
    assert report["ok"] and report["failures"] == []
    assert json.loads(cfg.read_text())["command"] == "verify"


def test_cascade_output(capsys):
    code, out, _ = run(capsys, "cascade", "--r-sq", "0.5", "--t", "0.6", "--p", "0")
    data = json.loads(out)
    assert code == 0
    assert abs(data["negativity"] - 1) < 1e-6 and data["b_prime"] == 1.0
    assert set(data["state"]) >= {"w1", "w2", "branch1", "branch2"}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "heralded", "herald", "--r-sq", "0.2", "--t", "0.5"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["p"] == 0
