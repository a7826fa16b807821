import re
import subprocess
import sys
from pathlib import Path

import pytest

from spinauto.cli import EXIT_DEGENERATE, EXIT_FAIL, EXIT_PASS, EXIT_USAGE, main
from spinauto.report import MACHINE_BEGIN, MACHINE_END, Report, machine_block, parse_machine_block

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"
CHECK_LINE = re.compile(r"^  \[(PASS|FAIL|true|false)\] \S+\s+\S+ (<=|<|>=|>) \S+$")


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def assert_every_check_line_has_value_and_tolerance(text):
    lines = [l for l in text.splitlines() if l.startswith("  [")]
    assert lines
    for line in lines:
        assert CHECK_LINE.match(line), line
    machine = parse_machine_block(text)
    names = {k.split(".")[1] for k in machine if k.startswith("check.")}
    for name in names:
        assert f"check.{name}.value" in machine and f"check.{name}.tol" in machine


def test_verify_fiber_passes(capsys):
    code, out, _ = run(["verify-fiber", "--seed", 42, "--count", 1000], capsys)
    assert code == EXIT_PASS
    assert "result: PASS" in out
    assert_every_check_line_has_value_and_tolerance(out)


@pytest.mark.parametrize("argv", [
    ["verify-fiber", "--seed", 7, "--count", 0],
    ["verify-fiber", "--count", "many"],
    [],
    ["transmogrify"],
    ["decompose"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main([str(a) for a in argv])
    assert info.value.code == EXIT_USAGE


def test_verify_fiber_deterministic(capsys):
    _, first, _ = run(["verify-fiber", "--seed", 5, "--count", 200], capsys)
    _, second, _ = run(["verify-fiber", "--seed", 5, "--count", 200], capsys)
    assert first == second
    _, other, _ = run(["verify-fiber", "--seed", 6, "--count", 200], capsys)
    assert machine_block(other) != machine_block(first)


def test_decompose_flat_constant_all_zero(tmp_path, capsys):
    path = tmp_path / "flat.txt"
    path.write_text("name = flat\ngrid.n = 8\n")
    code, out, _ = run(["decompose", path], capsys)
    assert code == EXIT_PASS
    machine = parse_machine_block(out)
    for part in ("B", "alt", "sym0", "trace"):
        assert float(machine[f"value.norm.{part}"]) == 0.0
    assert_every_check_line_has_value_and_tolerance(out)


def test_decompose_conformal_reconstruction(capsys):
    code, out, _ = run(["decompose", SCENARIO_DIR / "conformal-metric.txt", "--grid-n", 8], capsys)
    assert code == EXIT_PASS
    machine = parse_machine_block(out)
    assert float(machine["check.reconstruction.value"]) < 1e-12
    assert machine["scenario.grid.n"] == "8"


def test_malformed_file_exits_2_with_line(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("grid.n = 8\ngeometry.colour = red\n")
    code, out, err = run(["decompose", path], capsys)
    assert code == EXIT_USAGE
    assert "line 2" in err and out == ""


def test_missing_file_exits_2(tmp_path, capsys):
    code, _, err = run(["detect", tmp_path / "absent.txt"], capsys)
    assert code == EXIT_USAGE and "error" in err


def test_indefinite_metric_exits_2(tmp_path, capsys):
    path = tmp_path / "indefinite.txt"
    path.write_text("grid.n = 8\ngeometry.name = perturbed\ngeometry.amplitudes = 5\ngeometry.seed = 3\n")
    code, _, err = run(["decompose", path], capsys)
    assert code == EXIT_USAGE and "positive definite" in err


def test_bad_grid_override_exits_2(capsys):
    code, _, _ = run(["--grid-n", 2, "detect", SCENARIO_DIR / "flat-kahler.txt"], capsys)
    assert code == EXIT_USAGE


def test_minimize_flat_reports_collapsed(capsys):
    code, out, _ = run(["minimize", SCENARIO_DIR / "flat-kahler.txt", "--grid-n", 8], capsys)
    assert code == EXIT_PASS
    assert parse_machine_block(out)["value.collapsed"] == "true"
    assert "coincide" in out


def test_minimize_random_scenario_collinear(tmp_path, capsys):
    from spinauto.scenario import random_scenario

    path = tmp_path / "random.txt"
    path.write_text(random_scenario(1, 8).to_text())
    code, out, _ = run(["minimize", path], capsys)
    assert code == EXIT_PASS
    machine = parse_machine_block(out)
    assert machine["value.collapsed"] == "false"
    assert float(machine["check.collinearity_relative.value"]) <= 1e-8
    assert_every_check_line_has_value_and_tolerance(out)


def test_minimize_zero_spinor_exits_3(capsys):
    code, _, err = run(["minimize", SCENARIO_DIR / "zero-spinor.txt"], capsys)
    assert code == EXIT_DEGENERATE and "degenerate" in err


def test_detect_zero_spinor_exits_3(capsys):
    code, _, _ = run(["detect", SCENARIO_DIR / "zero-spinor.txt"], capsys)
    assert code == EXIT_DEGENERATE


@pytest.mark.parametrize("name, verdict", [
    ("flat-kahler", "true"), ("product-kahler", "true"), ("conformal-spinor", "false"),
])
def test_detect_catalog_verdicts(name, verdict, capsys):
    code, out, _ = run(["detect", SCENARIO_DIR / f"{name}.txt"], capsys)
    assert code == EXIT_PASS
    machine = parse_machine_block(out)
    assert machine["value.verdict.symplectic"] == verdict
    assert machine["value.verdict.criterion"] == verdict
    assert machine["value.outcome"] == "consistent"
    assert_every_check_line_has_value_and_tolerance(out)


def test_inconsistent_verdict_is_reported_not_raised(tmp_path, capsys):
    # forcing tol.m to zero makes the criterion reject a symplectic scenario
    path = tmp_path / "strict.txt"
    path.write_text((SCENARIO_DIR / "phase-product.txt").read_text() + "tol.m = 0\n")
    code, out, _ = run(["detect", path, "--grid-n", 8], capsys)
    assert code == EXIT_FAIL
    assert parse_machine_block(out)["value.outcome"] == "InconsistentVerdict"


def test_out_file_matches_stdout(tmp_path, capsys):
    target = tmp_path / "report.txt"
    code, out, _ = run(["--out", target, "verify-fiber", "--count", 50], capsys)
    assert code == EXIT_PASS and target.read_text() == out
    target2 = tmp_path / "report2.txt"
    run(["detect", SCENARIO_DIR / "flat-kahler.txt", "--grid-n", 8, "--out", target2], capsys)
    assert target2.read_text().count(MACHINE_BEGIN) == 1


def test_subprocess_runs_are_byte_identical():
    # n = 8 is too coarse for this scenario, so the run reports InconsistentVerdict; only determinism matters
    cmd = [sys.executable, "-m", "spinauto.cli", "detect", str(SCENARIO_DIR / "conformal-metric.txt"),
           "--grid-n", "8"]
    first = subprocess.run(cmd, capture_output=True, check=False)
    second = subprocess.run(cmd, capture_output=True, check=False)
    assert first.returncode == second.returncode
    assert first.stdout == second.stdout


def test_machine_block_parse_round_trip():
    report = Report("demo", {"name": "x"})
    report.check("small", 1e-13, 1e-12)
    report.measure("big", 2.0, 1.0)
    report.values["ratio"] = 1.0 / 3.0
    text = report.render()
    machine = parse_machine_block(text)
    assert float(machine["check.small.value"]) == 1e-13
    assert machine["check.big.holds"] == "false"
    assert float(machine["value.ratio"]) == 1.0 / 3.0
    assert machine["result"] == "pass"
    assert text.rstrip().endswith(MACHINE_END)
