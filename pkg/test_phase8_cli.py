"""
MPCLAB - Phase 8 Testing Script
Command-line harness: generation, runs, reports and exit codes

Run with: python test_phase8_cli.py   (or pytest)
"""

import contextlib
import io
import json
import os
import sys

from typer.testing import CliRunner

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from mpclab.cli import app
from mpclab.graph import generate, to_text
from mpclab.reports import REPORT_COLUMNS, emit_report

runner = CliRunner(mix_stderr=False)


def print_header(title):
    print("\n" + "=" * 60)
    print(f"  {title}")
    print("=" * 60)


def print_result(test_name, success, message=""):
    status = "PASS" if success else "FAIL"
    print(f"{status} | {test_name}")
    if message:
        print(f"       └─ {message}")


def invoke(*args, stdin=None):
    return runner.invoke(app, list(args), input=stdin)


def graph_text(family, n, **kwargs) -> str:
    return to_text(generate(family, n, **kwargs))


def test_gen_writes_text_graph():
    result = invoke("gen", "cycle", "12")
    assert result.exit_code == 0, result.stderr
    lines = result.stdout.splitlines()
    assert lines[0] == "nodes 12"
    assert sum(line.startswith("edge ") for line in lines) == 12


def test_gen_then_run():
    text = invoke("gen", "cycle", "12").stdout
    result = invoke("run", "deterministic_large_is", stdin=text)
    assert result.exit_code == 0, result.stderr
    report = json.loads(result.stdout)
    assert report["algorithm"] == "deterministic_large_is"
    assert report["valid"] is True
    assert report["n"] == 12 and report["rounds"] >= 1
    assert report["peak_words"] <= report["budget"]


def test_usage_errors_exit_2():
    assert invoke("run").exit_code == 2
    assert invoke("run", "no_such_algorithm", stdin=graph_text("path", 3)).exit_code == 2
    assert invoke("run", "constant_label", "--param", "oops", stdin=graph_text("path", 3)).exit_code == 2


def test_malformed_graph_exits_1():
    result = invoke("run", "constant_label", stdin="nodes 2\nnode 0 0 0\n")
    assert result.exit_code == 1
    assert "error" in result.stderr


def test_csv_reruns_are_identical():
    text = graph_text("gnp", 14, p=0.3, seed=2)
    args = ("run", "ball_local", "--format", "csv", "--reps", "3", "--delta", "0.95", "--space-constant", "256")
    first = invoke(*args, stdin=text)
    second = invoke(*args, stdin=text)
    assert first.exit_code == 0, first.stderr
    assert first.stdout == second.stdout
    lines = first.stdout.splitlines()
    assert lines[0] == ",".join(REPORT_COLUMNS)
    assert len(lines) == 4


def test_lift_sweep_agrees():
    result = invoke("lift", "sweep", "--hmax", "4", "--dmax", "4")
    assert result.exit_code == 0, result.stderr
    lines = result.stdout.splitlines()
    assert lines[0] == "host,size,D,pair,h_assignment,case_predicted,case_structural,agree"
    assert len(lines) > 1
    assert all(line.endswith(",true") for line in lines[1:])


def test_lift_replicate_check():
    result = invoke("lift", "replicate", "--copies", "9", "--check", "mis", stdin=graph_text("path", 3))
    assert result.exit_code == 0, result.stderr
    payload = json.loads(result.stdout)
    assert payload == {"problem": "mis", "labelings": 8, "failures": []}
    written = invoke("lift", "replicate", "--copies", "3", "--isolated", "1", stdin=graph_text("path", 3))
    assert written.stdout.splitlines()[0] == "nodes 10"


def test_lll_orients_every_edge():
    result = invoke("lll", stdin=graph_text("d_regular", 16, d=8, seed=1))
    assert result.exit_code == 0, result.stderr
    lines = result.stdout.splitlines()
    assert len(lines) == 64
    assert all(line.startswith("orient ") and line.endswith(" ->") for line in lines)


def test_seedsearch_prg():
    found = invoke("seedsearch", "prg", "--d", "2", "--m", "3")
    assert found.exit_code == 0, found.stderr
    assert len(found.stdout.splitlines()) == 4
    missing = invoke("seedsearch", "prg", "--d", "0", "--m", "1")
    assert missing.exit_code == 1
    assert invoke("seedsearch", "prg", "--epsilon", "abc").exit_code == 2


def test_stability_command():
    result = invoke("stability", "constant_label", "--budget", "6", stdin=graph_text("two_cycles", 10, seed=1))
    assert result.exit_code == 0, result.stderr
    payload = json.loads(result.stdout)
    assert payload["verdict"] == "stable-on-suite"
    assert payload["witness"] is None


def test_sensitivity_command():
    result = invoke("sensitivity", "constant_label", "--seed-bits", "2")
    assert result.exit_code == 0, result.stderr
    payload = json.loads(result.stdout)
    assert payload["probability"] == "0"
    assert payload["trials"] == 4 and payload["mode"] == "exact"


def test_derand_luby_command():
    result = invoke("derand", "luby", stdin=graph_text("cycle", 8, seed=3))
    assert result.exit_code == 0, result.stderr
    seed_line, members = result.stdout.splitlines()
    assert seed_line.startswith("seed family=")
    assert members.startswith("members ") and len(members.split()) > 1


def test_algorithms_listing():
    assert invoke("algorithms").exit_code == 0


def test_empty_csv_report_is_header_only():
    buffer = io.StringIO()
    with contextlib.redirect_stdout(buffer):
        emit_report([], fmt="csv")
    assert buffer.getvalue() == ",".join(REPORT_COLUMNS) + "\n"


def main():
    print_header("MPCLAB - Phase 8: command line")
    tests = [
        test_gen_writes_text_graph,
        test_gen_then_run,
        test_usage_errors_exit_2,
        test_malformed_graph_exits_1,
        test_csv_reruns_are_identical,
        test_lift_sweep_agrees,
        test_lift_replicate_check,
        test_lll_orients_every_edge,
        test_seedsearch_prg,
        test_stability_command,
        test_sensitivity_command,
        test_derand_luby_command,
        test_algorithms_listing,
        test_empty_csv_report_is_header_only,
    ]
    failed = 0
    for test in tests:
        try:
            test()
            print_result(test.__name__, True)
        except Exception as e:
            failed += 1
            print_result(test.__name__, False, f"{type(e).__name__}: {str(e)[:80]}")
    print(f"\n{len(tests) - failed}/{len(tests)} passed")
    return failed


if __name__ == "__main__":
    sys.exit(main())
