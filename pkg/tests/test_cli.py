import json
import subprocess
import sys

import pytest

from graphable.cli import main
from graphable.verify import SUITES, RunConfig, build_report, run_suite

MOD2 = '{"kind": "mod-k", "seed": 0, "params": {"k": 2}}'


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else out)


def test_usage_errors_exit_1(capsys):
    assert main(["no-such-command"]) == 1
    assert main(["ceer-graph", "adjacent", "--x", "1"]) == 1
    assert main(["verify", "--suite", "bogus"]) == 1
    assert main(["lo-code", "encode", "--order", '{"kind":"omega"}', "--payload", "12"]) == 1
    assert main(["lo-code", "verify", "--format", "dot"]) == 1


def test_ceer_commands(capsys, tmp_path):
    code, out = run(capsys, "ceer-graph", "adjacent", "--ceer", MOD2, "--x", "0", "--y", "2",
                    "--dot", str(tmp_path / "g.dot"))
    assert code == 0 and out["adjacent"] is True and out["certificate"]["chain"] == [[0, 1]]
    assert (tmp_path / "g.dot").read_text().startswith("graph witness {")
    code, out = run(capsys, "ceer-graph", "connect", "--ceer", MOD2, "--x", "0", "--y", "4",
                    "--budget", "100")
    assert code == 0 and out["z"] == 6
    assert main(["ceer-graph", "connect", "--ceer", MOD2, "--x", "0", "--y", "1",
                 "--budget", "1"]) == 2
    code, out = run(capsys, "ceer-graph", "verify", "--ceer", MOD2, "--pairs", "5")
    assert code == 0 and len(out["results"]) == 5


def test_lo_commands(capsys, tmp_path):
    path = tmp_path / "lo.json"
    assert main(["lo-code", "encode", "--order", '{"kind": "omega"}', "--payload", "1011",
                 "--prefix", "20", "--out", str(path)]) == 0
    code, out = run(capsys, "lo-code", "decode", "--order-table", str(path), "--bits", "8")
    assert code == 0 and out["payload"] == "1011"
    assert main(["lo-code", "decode", "--order-table", str(path), "--bits", "11"]) == 2
    code, out = run(capsys, "lo-code", "verify", "--seeds", "2", "--prefix", "40")
    assert code == 0 and [r["status"] for r in out["results"]] == ["pass", "pass"]


def test_struct_commands(capsys, tmp_path):
    path = tmp_path / "s.json"
    assert main(["struct-code", "encode", "--structure", '{"kind": "path-graph"}',
                 "--payload", "1010", "--stages", "8", "--budget", "10000",
                 "--out", str(path)]) == 0
    enc = json.loads(path.read_text())
    code, out = run(capsys, "struct-code", "decode", "--table", str(path))
    assert code == 0 and out["queue"] == enc["queue"] and out["payload"] == [1]
    assert main(["struct-code", "decode", "--table", str(path), "--budget", "1"]) == 2
    assert main(["struct-code", "encode", "--structure", '{"kind": "empty"}',
                 "--payload", "1", "--stages", "1"]) == 2
    code, out = run(capsys, "struct-code", "trivial-check", "--structure",
                    '{"kind": "even-predicate"}', "--budget", "10")
    assert out["witness"]["formula"] == "P(y1)"
    code, out = run(capsys, "struct-code", "trivial-check", "--structure",
                    '{"kind": "even-predicate"}', "--other", '{"kind": "odd-predicate"}')
    assert code == 3 and out["atom"] == ["P", [0]]


def test_ks_commands(capsys):
    ones = '{"kind": "constant", "params": {"bit": 1}}'
    code, out = run(capsys, "ks-force", "encode", "--payload", "101", "--path", ones,
                    "--rounds", "3")
    assert code == 0 and out["labels"] == "101"
    assert main(["ks-force", "encode", "--payload", "1", "--path", ones, "--rounds", "2",
                 "--selectors", "label-along-path"]) == 3
    cond = '{"depth": 1, "labels": {"": 1, "0": 0, "1": "bot"}}'
    code, out = run(capsys, "ks-force", "eval", "--condition", cond, "--path",
                    '{"kind": "constant", "params": {"bit": 0}}', "--depth", "4")
    assert out == {"labels": "10"}


def test_report_schema_and_empty_selector():
    report = build_report("ks-poset-laws", RunConfig(seed=3))
    assert report["suite"] == "ks-poset-laws"
    assert [r["property"] for r in report["results"]] == sorted(r["property"] for r in report["results"])
    for r in report["results"]:
        assert set(r) == {"property", "status", "counterexample"}
    assert run_suite("", RunConfig()) == []
    with pytest.raises(KeyError):
        run_suite("nope", RunConfig())


@pytest.mark.parametrize("suite", ["oracles", "struct-triviality", "ks-contracts", "ks-poset-laws"])
def test_quick_suites_pass(suite):
    assert all(r["status"] == "pass" for r in run_suite(suite, RunConfig(seed=1)))


def test_small_config_is_reproducible():
    cfg = RunConfig(seed=5, lo_seeds=3, struct_instances=3, struct_stages=6, ks_runs=3,
                    ceer_pairs=5, ceer_merges=2)
    assert run_suite("all", cfg) == run_suite("all", cfg)
    assert set(SUITES) >= {"lo-roundtrip", "ks-poset-laws"}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "graphable", "verify", "--suite", ""],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["results"] == []
