import csv
import io
import json
import subprocess
import sys

import pytest

from tbsc import build_tbsc, manifest
from tbsc.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_construct_worked_example(capsys):
    code, out, _ = run(capsys, "construct", "--b1", "2", "--b2", "3", "--T", "7")
    assert code == 0
    assert "rate: 5/8" in out
    assert "sr profile: 2,2,2,4,4" in out
    assert "rd profile: 3,3,5,5,5" in out


def test_construct_json(capsys):
    code, out, _ = run(capsys, "construct", "--b1", "2", "--b2", "3", "--T", "7", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["rate"] == "5/8"
    assert d["sr_profile"] == [2, 2, 2, 4, 4] and d["rd_profile"] == [3, 3, 5, 5, 5]


def test_construct_infeasible(capsys):
    code, _, err = run(capsys, "construct", "--b1", "2", "--b2", "3", "--T", "6")
    assert code == 2
    assert "ceil" in err


def test_construct_equal_b(capsys):
    code, out, _ = run(capsys, "construct", "--b1", "1", "--b2", "1", "--T", "2", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["rate"] == "1/2" and d["feasibility"]["path"] == "equal-b"


def test_construct_writes_manifest_and_matrices(capsys, tmp_path):
    code, _, _ = run(capsys, "construct", "--b1", "2", "--b2", "3", "--T", "7", "--out", str(tmp_path))
    assert code == 0
    text = (tmp_path / "tbsc_2_3_7.json").read_text()
    assert manifest.dumps(manifest.loads(text)) == text
    assert manifest.loads(text) == build_tbsc(2, 3, 7)
    assert (tmp_path / "tbsc_2_3_7_sr_P2.txt").read_text() == "5 3\n100\n010\n001\n000\n000\n"
    names = sorted(p.name for p in tmp_path.glob("*_P*.txt"))
    assert len(names) == 6


def test_output_dir_from_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("TBSC_OUT_DIR", str(tmp_path / "reports"))
    code, _, _ = run(capsys, "construct", "--b1", "1", "--b2", "2", "--T", "4")
    assert code == 0
    assert (tmp_path / "reports" / "tbsc_1_2_4.json").exists()


def test_sweep_feasible_set(capsys):
    code, out, _ = run(capsys, "sweep", "--b1", "2", "--b2", "3", "--T", "4..20", "--budget", "0")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    feasible = [int(r["T"]) for r in rows if r["feasible"] == "True"]
    assert feasible == [5] + list(range(7, 21))


def test_sweep_verifies(capsys):
    code, out, _ = run(capsys, "sweep", "--b1", "1..2", "--b2", "2", "--T", "4..5", "--budget", "20", "--format", "json")
    rows = json.loads(out)
    assert code == 0
    assert [(r["b1"], r["T"]) for r in rows] == [(1, 4), (1, 5), (2, 4), (2, 5)]
    assert all(r["verified"] in ("pass", "-") for r in rows)
    assert any(r["verified"] == "pass" for r in rows)


def test_verify_exhaustive(capsys, tmp_path):
    code, out, _ = run(
        capsys, "verify", "--b1", "2", "--b2", "3", "--T", "7", "--exhaustive", "--out", str(tmp_path)
    )
    assert code == 0
    assert out.startswith("pass")
    assert "max delay: 7,7,7,7,7" in out
    report = json.loads((tmp_path / "verify_2_3_7_exhaustive.json").read_text())
    assert report["passed"] and report["horizon"] == 16 and report["rate"] == "5/8"


def test_verify_randomized_json(capsys):
    code, out, _ = run(capsys, "verify", "--b1", "3", "--b2", "2", "--T", "8", "--budget", "50", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["passed"] and d["mode"] == "randomized" and d["seed"] == 0


def test_simulate_empty_schedules(capsys):
    code, out, _ = run(capsys, "simulate", "--b1", "2", "--b2", "3", "--T", "7", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["success"]
    assert d["max_delay"] == d["relay_lags"][::-1]


def test_simulate_inline_and_file(capsys, tmp_path):
    code, out, _ = run(capsys, "simulate", "--b1", "2", "--b2", "3", "--T", "7", "--sr-erased", "0,1", "--rd-erased", "4,5,6")
    assert code == 0 and "pass: max delay 7,7,7,7,7" in out
    f = tmp_path / "s.json"
    f.write_text(json.dumps({"sr_erased": [0, 1], "rd_erased": [4, 5, 6]}))
    code, out, _ = run(capsys, "simulate", "--b1", "2", "--b2", "3", "--T", "7", "--schedule-file", str(f), "--format", "json")
    assert code == 0 and json.loads(out)["max_delay"] == [7] * 5


def test_simulate_inadmissible(capsys):
    code, _, err = run(capsys, "simulate", "--b1", "2", "--b2", "3", "--T", "7", "--sr-erased", "0,1,2")
    assert code == 1 and "error" in err


def test_example_command(capsys):
    code, out, _ = run(capsys, "example")
    assert code == 0
    assert out.count("[PASS]") == 6 and "FAIL" not in out


@pytest.mark.parametrize(
    "argv",
    [[], ["construct"], ["construct", "--b1", "x", "--b2", "3", "--T", "7"], ["sweep", "--b1", "1", "--b2", "2", "--T", "4-5"]],
)
def test_usage_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 1


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "tbsc", "construct", "--b1", "2", "--b2", "3", "--T", "6"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 2
