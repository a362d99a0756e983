"""
Tests for scanline words, the automata A_k and their generating functions
"""

import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from itertools import product

import numpy as np
import pytest

from src.services.compute import automaton, enumeration
from src.services.compute.errors import NotARunWord
from src.services.compute.permutations import Permutation, run_lengths
from src.services.compute.popstacked import is_popstacked
from src.services.compute.series import Polynomial, RationalFunction, partial_fractions
from src.services.data import oracle


def test_scanline_round_trip_on_worked_example():
    p = Permutation.parse("261453")
    word = automaton.scanline(p)
    assert str(word) == "213221"
    assert word.k == 3
    assert automaton.scanline_inverse(automaton.Word.parse("213221")) == p
    assert automaton.scanline_inverse(automaton.Word.parse("2 1 3 2 2 1")) == p


def test_scanline_inverse_rejects_non_run_words():
    with pytest.raises(NotARunWord):
        automaton.scanline_inverse(automaton.Word.parse("12", k=2))
    with pytest.raises(NotARunWord):
        automaton.scanline_inverse(automaton.Word.parse("113"))
    with pytest.raises(ValueError):
        automaton.Word((3,), 2)


@pytest.mark.parametrize("n", [4, 5, 6])
def test_scanline_is_a_bijection_on_each_run_class(n):
    for p in oracle.all_permutations(n):
        word = automaton.scanline(p)
        assert word.k == len(run_lengths(p))
        assert automaton.scanline_inverse(word) == p


def test_A2_accepts_exactly_both_orders():
    a2 = automaton.build_Ak(2)
    assert a2.accepts([1, 2, 1])
    assert a2.accepts([2, 1, 2])
    assert not a2.accepts([1, 2])
    assert not a2.accepts([2, 2, 1])
    assert a2.is_complete()


@pytest.mark.parametrize("n", [4, 5, 6])
def test_acceptance_matches_popstacked_test(n):
    machines = {k: automaton.build_Ak(k) for k in range(1, n + 1)}
    for p in oracle.all_permutations(n):
        word = automaton.scanline(p)
        assert machines[word.k].accepts(word.letters) == is_popstacked(p)


def test_state_counts_and_recurrence():
    counts = [automaton.state_count(k) for k in range(1, 6)]
    assert counts == [2, 6, 20, 68, 232]
    assert counts == [automaton.state_count_recurrence(k) for k in range(1, 6)]


def test_minimized_state_counts():
    assert [automaton.minimize(automaton.build_Ak(k)).num_states for k in range(1, 6)] == [2, 6, 16, 40, 98]
    report = automaton.minimized_recurrence_report(5)
    assert list(report["minimized"]) == [2, 6, 16, 40, 98]
    assert list(report["match"][3:]) == [True, True]
    with pytest.raises(ValueError):
        automaton.minimized_recurrence_report(3)


def test_minimize_completes_partial_automata():
    partial = automaton.Dfa(k=1, labels=("start", "seen"), initial=0,
                            transitions=np.array([[1], [-1]]), accepting=frozenset({1}))
    assert partial.accepts([1])
    assert not partial.accepts([1, 1])
    assert not partial.is_complete()
    reduced = automaton.minimize(partial)
    assert reduced.is_complete()
    assert reduced.num_states == 3
    assert automaton.dfa_to_gf(partial) == RationalFunction(Polynomial.variable())


def test_word_counts():
    a2 = automaton.build_Ak(2)
    assert automaton.count_words(a2, 5) == 22
    assert automaton.count_words(a2, 2) == 0
    assert automaton.count_words(automaton.build_Ak(3), 4) == 2
    assert (automaton.transfer_matrix(a2).sum(axis=1) == 2).all()


def test_generating_function_for_two_runs():
    z = Polynomial.variable()
    one = Polynomial.constant(1)
    expected = RationalFunction(Polynomial.monomial(3, 2), (one - z * 2) * (one - z) ** 2)
    assert automaton.pk_gf(2) == expected
    assert automaton.pk_gf(1) == RationalFunction(z, one - z)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_generating_function_matches_oracle(k):
    series = automaton.pk_gf(k).series(7).integer_coefficients()
    for n in range(1, 8):
        assert series[n] == oracle.runs_table(n).get(k, 0)


def test_minimized_automaton_has_the_same_generating_function():
    built = automaton.build_Ak(3)
    assert automaton.dfa_to_gf(automaton.minimize(built)) == automaton.dfa_to_gf(built)


def test_structure_report_for_small_k():
    report = automaton.pk_structure_report(2).set_index("k")
    assert report.loc[1, "shape_ok"] and report.loc[2, "shape_ok"]
    row = report.loc[2]
    assert row["numerator_degree"] == row["expected_degree"] == 3
    assert row["leading_match"] and row["sum_match"]
    assert row["lowest_degree"] == row["expected_lowest"] == 3


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_generating_function_equals_closed_form(k):
    gf = automaton.pk_gf(k)
    assert gf == automaton.published_pk(k)
    assert gf.numerator.lowest_degree() == 3 * k // 2


def test_closed_forms_are_recorded_up_to_five():
    assert automaton.published_pk(3).series(5).integer_coefficients() == [0, 0, 0, 0, 2, 26]
    with pytest.raises(ValueError):
        automaton.published_pk(6)


@pytest.mark.parametrize("k", [2, 3, 4, 5, pytest.param(6, marks=pytest.mark.slow),
                               pytest.param(7, marks=pytest.mark.slow)])
def test_numerator_on_the_squared_factor(k):
    term = partial_fractions(automaton.pk_gf(k)).term_for(k - 1)
    assert term.exponent == 2
    assert term.numerator == automaton.nk_observed_form_1(k)
    assert term.numerator.constant_term == 3 * (k - 2)


@pytest.mark.slow
def test_state_count_recurrence_up_to_ten():
    counts = [automaton.state_count(k) for k in range(1, 11)]
    assert counts == [automaton.state_count_recurrence(k) for k in range(1, 11)]
    assert counts[-1] == 107616


@pytest.mark.parametrize("k", [1, 2, 3, pytest.param(4, marks=pytest.mark.slow)])
def test_minimize_is_idempotent_and_keeps_the_language(k):
    built = automaton.build_Ak(k)
    reduced = automaton.minimize(built)
    assert automaton.minimize(reduced).num_states == reduced.num_states
    for length in range(9):
        for letters in product(range(1, k + 1), repeat=length):
            assert reduced.accepts(letters) == built.accepts(letters)


def test_word_counts_match_the_counting_recurrence():
    table = enumeration.count_popstacked(10, with_runs=True)
    for k in range(1, 5):
        words = automaton.count_words_sequence(automaton.build_Ak(k), 10)
        assert words[1:] == [table.p_nk(n, k) for n in range(1, 11)]


@pytest.mark.slow
def test_word_counts_match_oracle_up_to_eight():
    for n in range(1, 9):
        runs = oracle.runs_table(n)
        for k in range(1, 5):
            assert automaton.count_words(automaton.build_Ak(k), n) == runs.get(k, 0)
