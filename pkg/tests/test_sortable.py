"""
Tests for two-pass sortable permutations, their coloured walks and the walk models
"""

import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import pytest

from src.services.compute import sortable
from src.services.compute.errors import InvalidColouring, Not2PSS, TooLarge
from src.services.compute.permutations import Permutation, cost
from src.services.data import oracle


def perm(text):
    return Permutation.parse(text)


@pytest.mark.parametrize("text, walk", [("41352", "D U- U- D"), ("2413", "U- D U-"), ("123", "U+ U+")])
def test_encode_and_decode_examples(text, walk):
    assert str(sortable.encode_2pss(perm(text))) == walk
    assert str(sortable.decode_walk(sortable.ColouredWalk.parse(walk))) == text


def test_encode_rejects_three_pass_permutations():
    p = perm("3412")
    assert cost(p) == 3
    with pytest.raises(Not2PSS):
        sortable.encode_2pss(p)


def test_decode_rejects_bad_colourings():
    with pytest.raises(InvalidColouring):
        sortable.decode_walk(sortable.ColouredWalk.parse("U- U+"))
    with pytest.raises(InvalidColouring):
        sortable.ColouredWalk.parse("U D X")


@pytest.mark.parametrize("n", [3, 4, 5, 6, pytest.param(7, marks=pytest.mark.slow), pytest.param(8, marks=pytest.mark.slow)])
def test_structural_test_and_bijection(n):
    encoded = set()
    for p in oracle.all_permutations(n):
        assert sortable.is_2pss_structural(p) == sortable.is_k_pss(p, 2)
        if sortable.is_k_pss(p, 2):
            walk = sortable.encode_2pss(p)
            assert walk.is_valid()
            assert sortable.decode_walk(walk) == p
            encoded.add(str(walk))
    assert encoded == {str(w) for w in sortable.coloured_walks(n - 1)}


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7, pytest.param(8, marks=pytest.mark.slow), pytest.param(9, marks=pytest.mark.slow)])
def test_ascent_table_matches_oracle(n):
    coefficients = sortable.bivariate_gf().coefficients(n)
    assert {k: c for (m, k), c in coefficients.items() if m == n} == oracle.ascent_table(n)


def test_twopss_table_frame():
    frame = sortable.twopss_table(3)
    assert list(frame.columns) == ["n", "k", "count"]
    assert frame[frame["n"] == 3].set_index("k")["count"].to_dict() == {0: 1, 1: 4, 2: 1}


def test_diagonals():
    assert sortable.diagonal_gf(0, 5).integer_coefficients() == [1, 4, 20, 116, 708, 4452]
    assert sortable.diagonal_gf(1, 3).integer_coefficients() == [1, 8, 48, 296]
    assert sortable.diagonal_gf(-1, 3).integer_coefficients() == [1, 6, 36, 224]
    with pytest.raises(TooLarge):
        sortable.diagonal_gf(20, 5)


def test_diagonal_matches_table():
    coefficients = sortable.bivariate_gf().coefficients(11)
    diagonal = sortable.diagonal_gf(0, 5).integer_coefficients()
    assert [coefficients.get((2 * n + 1, n), 0) for n in range(6)] == diagonal
    above = sortable.diagonal_gf(1, 4).integer_coefficients()
    assert [coefficients.get((2 * n + 2, n + 1), 0) for n in range(5)] == above


@pytest.mark.parametrize("n", range(1, 8))
def test_closed_forms_agree(n):
    alternating, weighted = sortable.diagonal_closed_forms(n)
    assert alternating == weighted == sortable.diagonal_gf(0, 7).integer_coefficients()[n]


@pytest.mark.slow
def test_closed_forms_agree_up_to_forty():
    diagonal = sortable.diagonal_gf(0, 30).integer_coefficients()
    for n in range(1, 41):
        alternating, weighted = sortable.diagonal_closed_forms(n)
        assert alternating == weighted
        if n <= 30:
            assert alternating == diagonal[n]


def test_walk_models():
    models = sortable.walk_model_gfs(order=12)
    assert models.consistent()
    assert models.excursions.integer_coefficients()[:5] == [1, 2, 6, 26, 126]
    assert models.alternate_excursions.integer_coefficients()[:5] == [1, 2, 8, 36, 180]
    assert models.bridges.integer_coefficients()[:4] == [1, 4, 20, 116]
    assert sortable.motzkin_numbers(6) == [1, 1, 2, 4, 9, 21]


def test_walk_table_matches_substitution():
    assert sortable.check_substitution_identity(8)
    counts = sortable.coloured_walk_counts(6)
    assert counts[2] == {-2: 1, 0: 4, 2: 1}


def test_alternate_model_excursions():
    table = sortable.alternate_model_counts(8, floor=0, both_starts=False)
    assert [table[2 * n].get(0, 0) for n in range(5)] == [1, 2, 8, 36, 180]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_bridge_halving(n):
    total, ending_up = sortable.bridge_endings(n)
    assert total == sortable.diagonal_gf(0, 4).integer_coefficients()[n]
    assert sortable.bridge_halving_check(n)


def test_bridge_halving_limit():
    with pytest.raises(TooLarge):
        sortable.bridge_halving_check(50)
