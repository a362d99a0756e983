"""
Test script for the flip-sort MCP tools
"""

import asyncio
import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.services.compute import automaton
from src.services.compute.errors import SingularSystem
from src.services.data import formats
from src.services.tools.automaton_tool import flipsort_automaton
from src.services.tools.count_tool import flipsort_addition_cost, flipsort_count
from src.services.tools.diagram_tool import flipsort_diagram
from src.services.tools.permutation_tool import (
    flipsort_cost,
    flipsort_flip,
    flipsort_is_popstacked,
    flipsort_preimages,
    flipsort_trace,
)
from src.services.tools.series_tool import flipsort_series
from src.services.tools.twopss_tool import flipsort_twopss
from src.services.tools.verify_tool import flipsort_verify
from src.services.tools.worstcase_tool import flipsort_worstcase


def run(coro):
    return asyncio.run(coro)


def test_permutation_tools():
    assert run(flipsort_flip("3276145"))["result"] == "2316745"
    assert run(flipsort_flip("3276145", steps=4))["result"] == "1234567"
    assert run(flipsort_cost("3 2 7 6 1 4 5"))["cost"] == 4
    trace = run(flipsort_trace("231"))
    assert trace["trajectory"] == ["231", "213", "123"] and trace["cost"] == 2
    member = run(flipsort_is_popstacked("213"))
    assert member["popstacked"] and member["preimage"] == "231"
    assert run(flipsort_is_popstacked("21"))["preimage"] is None


def test_preimage_methods():
    bars = run(flipsort_preimages("132"))
    assert bars["method"] == "bars" and bars["preimages"] == ["312"]
    brute = run(flipsort_preimages("2413"))
    assert brute["method"] == "oracle"
    assert brute["count"] == len(brute["preimages"])


def test_errors_are_payloads():
    result = run(flipsort_cost("1 1 2"))
    assert result["status"] == "error"
    assert result["error_type"] == "InvalidPermutation"
    result = run(flipsort_count(5, fmt="csv"))
    assert result["status"] == "error" and result["error_type"] == "ValueError"
    assert result["input_error"]


def test_count_tool_formats():
    plain = run(flipsort_count(6))
    assert plain["values"] == [1, 1, 3, 11, 49, 263]
    assert formats.parse_bfile(plain["text"])[6] == 263
    triangle = run(flipsort_count(5, runs=True, fmt="csv"))
    assert formats.parse_triangle_csv(triangle["text"])[(5, 2)] == 22
    assert [5, 2, 22] in triangle["triangle"]
    as_json = run(flipsort_count(4, fmt="json"))
    assert formats.parse_sequence_json(as_json["text"]) == {1: 1, 2: 1, 3: 3, 4: 11}
    cost = run(flipsort_addition_cost(12))
    assert cost["additions"] > 0 and cost["main_term"] == 12 ** 4 / 8


def test_automaton_tool():
    built = run(flipsort_automaton("build", 2, 6))
    assert built["states"] == built["recurrence"] == 6
    assert built["word_counts"] == [0, 0, 0, 2, 8, 22, 52]
    minimized = run(flipsort_automaton("minimize", 3))
    assert minimized["minimized"] == 16
    gf = run(flipsort_automaton("gf", 2, 5))
    assert gf["series"] == [0, 0, 0, 2, 8, 22]
    assert gf["polynomial_part"] == "-1"
    assert formats.parse_gf_text(gf["gf_text"]).series(5).integer_coefficients() == gf["series"]
    report = run(flipsort_automaton("report", 2))
    assert [row["k"] for row in report["structure"]] == [1, 2]
    assert [row["minimized"] for row in report["minimized"]] == [2, 6, 16, 40]
    assert run(flipsort_automaton("shrink", 2))["status"] == "error"


def test_series_tool():
    pk = run(flipsort_series("pk", 6, k=2))
    assert pk["series"] == [0, 0, 0, 2, 8, 22, 52]
    eulerian = run(flipsort_series("eulerian", 5, k=2))
    assert eulerian["column"] == [0, 1, 4, 11, 26]
    assert eulerian["series"][1:] == eulerian["column"]
    table = run(flipsort_series("A", 3))
    assert {"n": 3, "k": 1, "count": 4} in table["table"]
    diagonal = run(flipsort_series("Dk", 5))
    assert diagonal["series"] == [1, 4, 20, 116, 708, 4452]
    assert all(a == b == diagonal["series"][n] for n, (a, b) in enumerate(diagonal["closed_forms"], start=1))
    bridge = run(flipsort_series("bridge", 4))
    assert bridge["excursions"] == [1, 2, 6, 26, 126]
    assert bridge["consistent"]
    assert run(flipsort_series("pk", 5))["status"] == "error"


def test_twopss_tool():
    encoded = run(flipsort_twopss("encode", "41352"))
    assert encoded["walk"] == "D U- U- D" and encoded["cost"] == 2
    decoded = run(flipsort_twopss("decode", "U- D U-"))
    assert decoded["permutation"] == "2413"
    table = run(flipsort_twopss("table", n_max=3))
    assert {"n": 3, "k": 0, "count": 1} in table["table"]
    rejected = run(flipsort_twopss("encode", "3412"))
    assert rejected["error_type"] == "Not2PSS"


def test_worstcase_tool():
    widths = run(flipsort_worstcase("bandwidth", perm="3412"))
    assert widths["bandwidths"] == [2, 2, 1, 0]
    assert widths["bounds"] == [3, 2, 1, 0]
    assert run(flipsort_worstcase("bandwidth", n=5))["holds"]
    image = run(flipsort_worstcase("im-n2", perm="132546"))
    assert image["member"] and image["preimage"] == "563412"
    witness = run(flipsort_worstcase("witness", n=4, m=1, i=2, j=1))
    assert witness["witness"] == "3412" and witness["image"] == "3142"
    outside = run(flipsort_worstcase("witness", n=4, m=3, i=1, j=4))
    assert outside["error_type"] == "OutOfAllowedRegion"
    hasse = run(flipsort_worstcase("hasse", k=2, nk=2))
    assert hasse["chain"] == ["LLSS", "LSLS", "SLSL", "SSLL"]
    assert len(hasse["edges"]) == 6
    report = run(flipsort_worstcase("skew-report", n=5))
    assert report["counts"] == {"3": 2, "4": 12}
    assert report["all_match"] and len(report["rows"]) == 14
    missing = run(flipsort_worstcase("witness", n=4))
    assert missing["status"] == "error" and "m, i, j" in missing["message"]


def test_diagram_tool():
    seeded = run(flipsort_diagram("random:8", [0, 2], seed=11))
    assert seeded["prng"] == "PCG64" and seeded["seed"] == 11
    assert seeded["bounds"] == {0: 7, 2: 5}
    frame, metadata = formats.parse_csv(seeded["csv"])
    assert metadata["seed"] == "11" and len(frame) == 16
    again = run(flipsort_diagram("random:8", [0, 2], seed=11))
    assert again["csv"] == seeded["csv"]
    fixed = run(flipsort_diagram("3412"))
    assert fixed["permutation"] == "3412" and "seed" not in fixed
    assert run(flipsort_diagram("random:x"))["status"] == "error"


def test_verify_tool():
    result = run(flipsort_verify(4))
    assert result["status"] == "success"
    assert result["passed"], result["failed"]
    assert set(result["suites"]) == {"perm-core", "popstacked", "enumeration", "word-automaton",
                                     "sortable", "worstcase"}
    assert result["skew_conjecture"]["all_match"]
    assert all(result["suites"]["word-automaton"][f"P{k}_closed_form"] for k in range(1, 6))
    minimized = {row["k"]: row["minimized"] for row in result["minimized_recurrence"]}
    assert [minimized[k] for k in range(1, 6)] == [2, 6, 16, 40, 98]
    assert sorted(minimized) == list(range(1, 9))
    assert run(flipsort_verify(2))["status"] == "error"
    assert run(flipsort_verify(4, ["nope"]))["status"] == "error"


def test_singular_system_is_not_an_input_error(monkeypatch):
    def singular(_):
        raise SingularSystem("state equations have no unique solution")

    monkeypatch.setattr(automaton, "dfa_to_gf", singular)
    result = run(flipsort_automaton("gf", 2))
    assert result["status"] == "error"
    assert result["error_type"] == "SingularSystem"
    assert not result["input_error"]
