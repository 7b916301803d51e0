import math
import subprocess
import sys

import pytest

from shrinker_lab.cli import _decode_decorations, _encode_decorations, run_cli
from shrinker_lab.io import read_csv, read_manifest


def _snapshot(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


def test_usage_errors_exit_3(tmp_path, capsys):
    out = str(tmp_path)
    assert run_cli(["bogus"]) == 3
    assert run_cli([]) == 3
    assert run_cli(["shoot", "S", "--out", out]) == 3
    assert run_cli(["shoot", "S", "--t", "-1", "--out", out]) == 3
    assert run_cli(["shoot", "S", "--t", "1", "--n", "1", "--out", out]) == 3
    assert run_cli(["planar", "--closed", "2", "4", "--out", out]) == 3
    assert run_cli(["report", "--out", out]) == 3
    assert run_cli(["report", "--compare", "--out", out]) == 3
    assert "error" in capsys.readouterr().err


def test_help_and_version_exit_0(capsys):
    assert run_cli(["--help"]) == 0
    assert run_cli(["--version"]) == 0
    assert run_cli(["find", "--help"]) == 0


def test_search_failure_exit_2(tmp_path):
    assert run_cli(["planar", "--closed", "1", "3", "--out", str(tmp_path)]) == 2


def test_verify_exact(tmp_path, capsys):
    assert run_cli(["verify-exact", "--n", "2", "--out", str(tmp_path)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(x.startswith("PASS") for x in lines)
    man = read_manifest(tmp_path / "verify-exact-n2" / "manifest.txt")
    assert man["result.all_pass"] == "true"


def test_shoot_outputs_and_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run_cli(["shoot", "T", "--t", "0.5", "--s-max", "8", "--out", str(d)]) == 0
    assert _snapshot(a) == _snapshot(b)
    run = a / "shoot-T-0.5"
    assert {p.name for p in run.iterdir()} == {"manifest.txt", "curve.csv", "figure.svg", "trajectory.csv", "events.csv"}
    schema, cols, data = read_csv(run / "trajectory.csv")
    assert schema == "profile-trajectory" and cols == ["s", "u", "v", "psi"]
    assert data[0, 1] == 0.0 and data[0, 2] == 0.5
    man = read_manifest(run / "manifest.txt")
    assert man["config.t"] == "0.5" and man["files.curves"] == "curve.csv"


def test_report_regenerates_identical_bytes(tmp_path):
    assert run_cli(["shoot", "bi", "--t", "1.7320508075688772", "--out", str(tmp_path)]) == 0
    run = tmp_path / "shoot-bi-1.7320508075688772"
    before = _snapshot(run)
    (run / "figure.svg").unlink()
    assert run_cli(["report", str(run / "manifest.txt")]) == 0
    assert _snapshot(run) == before


def test_find_torus_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run_cli(["find", "torus-embedded", "--out", str(d)]) == 0
    assert _snapshot(a) == _snapshot(b)
    man = read_manifest(a / "find-torus-embedded-n2" / "manifest.txt")
    assert man["result.classification"] == "embedded_torus"
    assert man["files.closed"] == "true"


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("config.t=0.75\ns-max=5\n")
    assert run_cli(["shoot", "S", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    man = read_manifest(tmp_path / "shoot-S-0.75" / "manifest.txt")
    assert man["config.s_max"] == "5.0"
    # command-line flags win over the file
    assert run_cli(["shoot", "S", "--config", str(cfg), "--t", "0.5", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "shoot-S-0.5" / "manifest.txt").exists()
    cfg.write_text("colour=red\n")
    assert run_cli(["shoot", "S", "--t", "1", "--config", str(cfg), "--out", str(tmp_path)]) == 3


def test_decoration_codec():
    decs = [("hline", 1.0), ("diagonal",), ("circle", (0.0, 0.5), math.sqrt(2)), ("vline", -2.0)]
    assert _decode_decorations(_encode_decorations(decs)) == decs
    assert _decode_decorations("") == []


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "shrinker_lab.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "shrinker-lab" in r.stdout
