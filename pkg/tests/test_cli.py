"""
Tests for the flipsort command line
"""

import json
import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import pytest

from src.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, build_parser, main
from src.services.compute import automaton
from src.services.compute.errors import SingularSystem
from src.services.data import formats


def lines(capsys):
    return capsys.readouterr().out.strip().splitlines()


def test_flip_cost_and_trace(capsys):
    assert main(["flip", "3276145"]) == EXIT_OK
    assert lines(capsys) == ["2316745"]
    assert main(["cost", "3 2 7 6 1 4 5"]) == EXIT_OK
    assert lines(capsys) == ["4"]
    assert main(["trace", "231"]) == EXIT_OK
    assert lines(capsys) == ["231", "213", "123"]


def test_popstacked_and_preimages(capsys):
    assert main(["is-popstacked", "213"]) == EXIT_OK
    assert lines(capsys) == ["yes (pre-image 231)"]
    assert main(["is-popstacked", "21"]) == EXIT_OK
    assert lines(capsys) == ["no"]
    assert main(["preimages", "132"]) == EXIT_OK
    assert lines(capsys) == ["312"]


def test_bad_permutation_exits_with_usage_code(capsys):
    assert main(["cost", "1 1 2"]) == EXIT_USAGE
    captured = capsys.readouterr()
    assert "InvalidPermutation" in captured.err


def test_count_outputs(capsys):
    assert main(["count", "p", "--max", "5"]) == EXIT_OK
    assert lines(capsys) == ["1 1 3 11 49"]
    assert main(["count", "p", "--max", "4", "--format", "bfile"]) == EXIT_OK
    assert lines(capsys) == ["1 1", "2 1", "3 3", "4 11"]
    assert main(["count", "p", "--max", "4", "--runs"]) == EXIT_OK
    assert lines(capsys)[0] == "n,k,count"


def test_json_flag(capsys):
    assert main(["--json", "cost", "3276145"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["cost"] == 4 and "status" not in payload


def test_automaton_export(tmp_path, capsys):
    target = tmp_path / "a2.txt"
    assert main(["automaton", "build", "--runs", "2", "--export", str(target)]) == EXIT_OK
    capsys.readouterr()
    assert formats.parse_dfa_text(target.read_text()).num_states == 6
    gf_target = tmp_path / "p2.txt"
    assert main(["automaton", "gf", "--runs", "2", "--export", str(gf_target)]) == EXIT_OK
    assert gf_target.read_text() == "0 0 0 2 / 1 -4 5 -2\n"


def test_series_and_twopss(capsys):
    assert main(["series", "Dk", "--order", "3"]) == EXIT_OK
    assert lines(capsys) == ["1 4 20 116"]
    assert main(["twopss", "decode", "D U- U- D"]) == EXIT_OK
    assert lines(capsys) == ["41352"]
    assert main(["twopss", "encode", "2413"]) == EXIT_OK
    assert lines(capsys) == ["U- D U-"]


def test_worstcase_witness_and_report(tmp_path, capsys):
    assert main(["worstcase", "witness", "--n", "4", "--m", "1", "--i", "2", "--j", "1"]) == EXIT_OK
    assert lines(capsys) == ["3412"]
    out = tmp_path / "skew.csv"
    assert main(["worstcase", "skew-report", "--n", "5", "--out", str(out)]) == EXIT_OK
    capsys.readouterr()
    frame, _ = formats.parse_csv(out.read_text())
    assert len(frame) == 14
    assert set(frame.columns) == {"perm", "parts", "cost", "conjectured", "match"}


def test_diagram_to_file(tmp_path, capsys):
    out = tmp_path / "dots.csv"
    assert main(["diagram", "random:6", "--iter", "0", "--iter", "3", "--seed", "2", "--out", str(out)]) == EXIT_OK
    assert "m=3: 2" in capsys.readouterr().out
    frame, metadata = formats.parse_csv(out.read_text())
    assert metadata == {"n": "6", "prng": "PCG64", "seed": "2"}
    assert sorted(frame["m"].unique().tolist()) == [0, 3]


def test_verify_exit_code(capsys):
    assert main(["verify", "all", "--n", "4"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["passed"]


def test_parser_requires_a_subcommand():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_internal_arithmetic_fault_exits_as_failure(monkeypatch, capsys):
    def singular(_):
        raise SingularSystem("state equations have no unique solution")

    monkeypatch.setattr(automaton, "dfa_to_gf", singular)
    assert main(["automaton", "gf", "--runs", "2"]) == EXIT_FAILED
    assert "SingularSystem" in capsys.readouterr().err
