import os
import subprocess
import sys

import pytest

from respi.cli import main

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
PROVIDERS = os.path.join(ROOT, "scenarios", "providers.respi")
PROVIDERS_TYPES = os.path.join(ROOT, "scenarios", "providers.styp")
DELTA = os.path.join(ROOT, "scenarios", "delta_delta.respi")


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_run_providers(tmp_path, capsys):
    trace = str(tmp_path / "t.trace")
    code, out, _ = run_cli(
        [PROVIDERS, "--mode", "run", "--seed", "1", "--trace-out", trace], capsys
    )
    assert code == 0
    assert os.path.exists(trace)
    first = open(trace).read()
    assert first.startswith("INIT ")
    steps, mems = out.split(",")[0], out
    assert "memories" in out


def test_run_is_seed_deterministic(tmp_path, capsys):
    t1, t2, t3 = (str(tmp_path / f"{i}.trace") for i in range(3))
    run_cli([PROVIDERS, "--mode", "run", "--seed", "9", "--trace-out", t1], capsys)
    run_cli([PROVIDERS, "--mode", "run", "--seed", "9", "--trace-out", t2], capsys)
    run_cli([PROVIDERS, "--mode", "run", "--seed", "4", "--trace-out", t3], capsys)
    assert open(t1).read() == open(t2).read()
    assert open(t1).read() != open(t3).read()


def test_run_inaction_zero_steps(tmp_path, capsys):
    src = tmp_path / "zero.respi"
    src.write_text("0\n")
    trace = str(tmp_path / "z.trace")
    code, out, _ = run_cli([str(src), "--mode", "run", "--trace-out", trace], capsys)
    assert code == 0
    assert out.startswith("0 steps")
    lines = [l for l in open(trace).read().splitlines() if l.strip()]
    assert len(lines) == 1  # just the INIT line


def test_parse_error_exit_2(tmp_path, capsys):
    src = tmp_path / "bad.respi"
    src.write_text("req a(x. 0")
    code, _, err = run_cli([str(src), "--mode", "run"], capsys)
    assert code == 2
    assert "parse error" in err


def test_missing_file_exit_2(capsys):
    code, _, _ = run_cli(["/nonexistent.respi", "--mode", "run"], capsys)
    assert code == 2


def test_typecheck_scenario(capsys):
    code, out, _ = run_cli(
        [PROVIDERS, "--mode", "typecheck", "--types", PROVIDERS_TYPES], capsys
    )
    assert code == 0
    assert "well-typed" in out


def test_typecheck_failure_exit_1(tmp_path, capsys):
    src = tmp_path / "bad.respi"
    src.write_text("req a_login(x). ( x!<1>. 0 | x!<2>. 0 )\n")
    code, out, _ = run_cli(
        [str(src), "--mode", "typecheck", "--types", PROVIDERS_TYPES], capsys
    )
    assert code == 1
    assert "linearity-violation" in out


def test_typecheck_config_counterexample(capsys):
    code, out, _ = run_cli([DELTA, "--mode", "typecheck"], capsys)
    assert code == 1
    assert "composition-undefined" in out


def test_graph_out(tmp_path, capsys):
    graph = str(tmp_path / "g.txt")
    code, _, _ = run_cli(
        [PROVIDERS, "--mode", "run", "--seed", "2", "--graph-out", graph], capsys
    )
    assert code == 0
    text = open(graph).read()
    assert text.startswith("node ")


def test_check_props_two_sessions(capsys):
    fixture = os.path.join(ROOT, "scenarios", "two_sessions.respi")
    code, out, _ = run_cli([fixture, "--mode", "check-props", "--bound", "3"], capsys)
    assert code == 0
    assert out.count("PASS") == 4


def test_check_props_catches_mutated_engine(capsys):
    fixture = os.path.join(ROOT, "scenarios", "two_sessions.respi")
    code, out, _ = run_cli(
        [fixture, "--mode", "check-props", "--bound", "3", "--mutate", "com-swap"],
        capsys,
    )
    assert code == 1
    assert "FAIL" in out
    assert "counterexample" in out


def test_explore_mode(capsys):
    code, out, _ = run_cli(
        [PROVIDERS, "--mode", "explore-exhaustive", "--max-steps", "3"], capsys
    )
    assert code == 0
    assert "reachable configurations" in out
    assert "0 fail the consistency check" in out


def test_console_script_entry():
    proc = subprocess.run(
        [sys.executable, "-m", "respi.cli", PROVIDERS, "--mode", "run", "--seed", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
