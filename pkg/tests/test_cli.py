import json

import pytest

from polylab.cli import main
from polylab.scenario import BUILTIN_SCENARIOS


def test_geometry_run_and_exit_code(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["geometry", "--builtin", "cube-euclid", "--lambda", "25",
                 "--resolution", "16", "--out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "suite geometry: PASS" in text
    assert (out / "geometry_lam25.csv").exists()
    assert (out / "mesh_lam25.csv").exists()
    summary = json.loads((out / "geometry_summary.json").read_text())
    assert summary["passed"] is True


def test_scenario_file_round(tmp_path):
    f = tmp_path / "s.lab"
    f.write_text(BUILTIN_SCENARIOS["cube-euclid"])
    code = main(["validate", "--scenario", str(f)])
    assert code == 0


def test_input_error_exit_2(tmp_path, capsys):
    f = tmp_path / "bad.lab"
    f.write_text("[polytope]\nn = 3\nhalfspace = 1 0 0 ; -1\n")
    assert main(["validate", "--scenario", str(f)]) == 2
    assert main(["geometry", "--scenario", str(f), "--out", str(tmp_path / "o")]) == 2
    assert main(["geometry", "--scenario", str(tmp_path / "missing.lab"),
                 "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "error" in err


def test_determinism_byte_identical(tmp_path):
    args = ["check-algebra", "--trials", "100", "--seed", "3"]
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    for name in ("algebra_invariants.csv", "boundary_trials.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_scenarios_listing(capsys):
    assert main(["scenarios"]) == 0
    assert "cube-euclid" in capsys.readouterr().out


def test_assertion_failure_exits_1(tmp_path, capsys, monkeypatch):
    import sys

    import polylab.service.app  # noqa: F401  (loads the module)

    from polylab.experiments import Assertion, SuiteReport

    def fake(name, sc=None):
        r = SuiteReport(name)
        r.assertions.append(Assertion("doomed", False, "synthetic failure"))
        return r

    monkeypatch.setattr(sys.modules["polylab.service.app"], "run_suite", fake)
    code = main(["geometry", "--builtin", "cube-euclid", "--out", str(tmp_path / "o")])
    assert code == 1
    out = capsys.readouterr().out
    assert "FAIL" in out and "doomed" in out
