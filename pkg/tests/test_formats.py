"""
Tests for the text codecs: b-files, CSV tables, JSON, automata and generating functions
"""

import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import json
from fractions import Fraction

import pandas as pd
import pytest

from src.services.compute import automaton
from src.services.compute.enumeration import count_popstacked
from src.services.compute.errors import FormatError
from src.services.compute.series import Polynomial, RationalFunction
from src.services.data import formats


def test_bfile_layout():
    text = formats.to_bfile([1, 1, 3, 11])
    assert text == "1 1\n2 1\n3 3\n4 11\n"
    assert formats.parse_bfile("# p_n\n\n" + text) == {1: 1, 2: 1, 3: 3, 4: 11}


def test_bfile_rejects_bad_lines():
    with pytest.raises(FormatError):
        formats.parse_bfile("1 1 1\n")
    with pytest.raises(FormatError):
        formats.parse_bfile("1 x\n")


def test_csv_metadata_header():
    frame = pd.DataFrame({"m": [0, 0], "i": [1, 2], "value": [2, 1]})
    text = formats.dots_to_csv(frame, n=2, seed=5)
    assert text.startswith("# n=2\n# prng=PCG64\n# seed=5\nm,i,value\n")
    parsed, metadata = formats.parse_csv(text)
    assert metadata == {"n": "2", "prng": "PCG64", "seed": "5"}
    assert parsed["value"].tolist() == [2, 1]


def test_triangle_keeps_big_counts_exact():
    table = count_popstacked(18, with_runs=True)
    parsed = formats.parse_triangle_csv(formats.triangle_to_csv(table.triangle()))
    assert parsed == table.runs
    assert sum(c for (n, _), c in parsed.items() if n == 18) == 643813226048935
    with pytest.raises(FormatError):
        formats.triangle_to_csv(pd.DataFrame({"n": [1]}))


def test_json_documents():
    assert formats.parse_sequence_json(formats.sequence_to_json([1, 1, 3])) == {1: 1, 2: 1, 3: 3}
    with pytest.raises(FormatError):
        formats.parse_sequence_json("{\"offset\": 1}")
    payload = json.loads(formats.to_json({"x": Fraction(1, 2), "p": Polynomial((1, 2)), 3: [Fraction(4)]}))
    assert payload == {"x": "1/2", "p": ["1", "2"], "3": ["4"]}


def test_frame_records_turn_missing_cells_into_none():
    frame = pd.DataFrame({"k": [1, 2], "predicted": [None, 5]})
    assert formats.frame_records(frame) == [{"k": 1, "predicted": None}, {"k": 2, "predicted": 5.0}]


def test_automaton_text_reloads_to_the_same_language():
    built = automaton.build_Ak(3)
    text = formats.dfa_to_text(built)
    assert text.startswith("# k 3\n# states 20\n# initial 0\n")
    reloaded = formats.parse_dfa_text(text)
    assert reloaded.num_states == 20
    assert automaton.count_words_sequence(reloaded, 9) == automaton.count_words_sequence(built, 9)
    minimal = automaton.minimize(built)
    assert formats.dfa_to_text(automaton.minimize(reloaded)) == formats.dfa_to_text(minimal)


def test_automaton_text_errors():
    with pytest.raises(FormatError):
        formats.parse_dfa_text("# k 1\n# initial 0\n")
    with pytest.raises(FormatError):
        formats.parse_dfa_text("# k 1\n# states 1\n# initial 0\n0\t2\t0\n")
    with pytest.raises(FormatError):
        formats.parse_dfa_text("# k 1\n# states 1\n# initial 0\n0 one 0\n")


def test_generating_function_text():
    gf = automaton.pk_gf(2)
    assert formats.gf_to_text(gf) == "0 0 0 2 / 1 -4 5 -2\n"
    assert formats.parse_gf_text(formats.gf_to_text(gf)) == gf
    half = RationalFunction(Polynomial((Fraction(1, 2),)), Polynomial((1, -1)))
    assert formats.parse_gf_text(formats.gf_to_text(half)) == half
    assert formats.parse_gf_text("1 1") == RationalFunction(Polynomial((1, 1)))
    with pytest.raises(FormatError):
        formats.parse_gf_text("1 z / 1")
    assert formats.series_to_text(gf.series(4).coefficients) == "0 0 0 2 8\n"
