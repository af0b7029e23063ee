import io
import json
import subprocess
import sys

import pytest

from directlogic.cli import ERROR, FALSE, OK, main


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_decide_exit_codes():
    assert run("decide", "P |- P")[0] == OK
    assert run("decide", "P |- P \\/ Q")[0] == FALSE


def test_decide_trace_and_oracle():
    code, out, _ = run("decide", "P |- P \\/ Q", "--trace", "--oracle-depth", "8", "--format", "json")
    rec = json.loads(out)
    assert code == FALSE and rec["holds"] is False
    assert rec["oracle"]["proved"] is False
    assert rec["trace"]["children"]


def test_parse_error_is_exit_two_with_message():
    code, out, err = run("decide", "P |- (")
    assert code == ERROR and out == ""
    assert err.startswith("directlogic: error: 1:")


def test_unknown_subcommand_prints_usage():
    code, _, err = run("frobnicate")
    assert code == ERROR
    assert err.startswith("usage:")


def test_missing_file():
    code, _, err = run("check", "/nonexistent/none.dlp")
    assert code == ERROR
    assert err == "directlogic: error: no such file: /nonexistent/none.dlp\n"


def test_check_shipped_scripts():
    assert run("check", "catch22.dlp")[0] == OK
    code, out, _ = run("check", "incompleteness.dlp", "--fix", "uninferable")
    assert code == OK and "VERIFIED" in out


def test_check_rejects_unassumed_fix():
    assert run("check", "incompleteness.dlp", "--fix", "liar")[0] == ERROR


def test_empty_script_renders_header_and_result_only(tmp_path):
    f = tmp_path / "empty.dlp"
    f.write_text("theory T\n")
    code, out, _ = run("check", str(f))
    assert code == OK
    assert out.splitlines() == [f"script {f} theory T", "result: VERIFIED"]
    rec = json.loads(run("check", str(f), "--format", "json")[1])
    assert rec["steps"] == [] and rec["verified"] is True


def test_json_output_is_deterministic():
    a = run("check", "catch22.dlp", "--format", "json")[1]
    b = run("check", "catch22.dlp", "--format", "json")[1]
    assert a == b
    json.loads(a)


def test_eval_and_dot(tmp_path):
    dot = tmp_path / "g.dot"
    code, out, _ = run("eval", "1 ?| 2", "--format", "json", "--dot", str(dot))
    rec = json.loads(out)
    assert code == OK and rec["values"] == ["1", "2"]
    assert dot.read_text().startswith("digraph")


def test_chain_query_exit_codes():
    assert run("chain", "run", "catch22.dlt", "--query", "Crazy[Yossarian]")[0] == OK
    assert run("chain", "run", "catch22.dlt", "--query", "Happy[Yossarian]")[0] == FALSE


def test_sim_single_run_and_sweep(tmp_path):
    log = tmp_path / "run.log"
    code, out, _ = run("sim", "unbounded", "--seed", "3", "--max-steps", "100",
                       "--format", "json", "--log", str(log))
    assert code == OK and json.loads(out)["program"] == "unbounded"
    assert log.read_text().startswith("event 0 ")
    code, out, _ = run("sim", "csp", "--sweep", "0..9", "--max-steps", "200")
    assert code == OK and "runs 10" in out


def test_meta_subcommands():
    code, out, _ = run("meta", "reify", "~P")
    assert code == OK and "<not>" in out
    code, out, _ = run("meta", "abstract", '<not><pred name="P"/></not>')
    assert code == OK and "~P" in out
    code, out, _ = run("meta", "build", "curry", "--target", "Q")
    assert code == OK and "Curry |-{T} Q" in out


def test_help_exits_zero():
    assert run("--help")[0] == OK


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "directlogic.cli", "decide", "P |- P"],
                          capture_output=True, text=True)
    assert proc.returncode == OK
    assert "holds" in proc.stdout
