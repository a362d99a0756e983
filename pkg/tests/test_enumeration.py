"""
Tests for the generating tree and the counting recurrence for pop-stacked permutations
"""

import sys
import os
import time
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import pytest
from hypothesis import given, settings, strategies as st

from src.services.compute import enumeration
from src.services.compute.errors import NotPopStacked, RootPermutation, TooLarge, TruncationTooLarge
from src.services.compute.permutations import Permutation, flip
from src.services.data import oracle

KNOWN_COUNTS = [1, 1, 3, 11, 49, 263, 1653, 11877]


def perm(text):
    return Permutation.parse(text)


def test_state_key_reads_the_last_run():
    assert enumeration.state_key(perm("261453")) == enumeration.StateKey(n=6, k=3, a=3, b=3, c=3)
    assert enumeration.state_key(perm("3127456")) == enumeration.StateKey(n=7, k=3, a=4, b=5, c=6)


def test_children_of_one():
    assert [str(q) for q in enumeration.expand(perm("1"))] == ["213"]
    with pytest.raises(NotPopStacked):
        enumeration.expand(perm("21"))


def test_parent_examples():
    assert str(enumeration.parent(perm("123"))) == "12"
    assert str(enumeration.parent(perm("213"))) == "1"
    with pytest.raises(RootPermutation):
        enumeration.parent(perm("12"))
    with pytest.raises(NotPopStacked):
        enumeration.parent(perm("321"))


@given(st.integers(min_value=2, max_value=7).flatmap(lambda n: st.permutations(list(range(1, n + 1)))))
@settings(max_examples=100, deadline=None)
def test_every_child_points_back_to_its_parent(values):
    p = flip(Permutation(values))
    for child in enumeration.expand(p):
        assert enumeration.parent(child) == p


def test_tree_rejects_large_sizes():
    with pytest.raises(TooLarge):
        enumeration.generate_tree(50)


@pytest.mark.slow
def test_tree_generates_each_popstacked_permutation_once():
    tree = enumeration.generate_tree(8)
    assert [len(level) for level in tree.values()] == KNOWN_COUNTS
    for n in range(1, 9):
        assert tree[n] == oracle.popstacked_set(n)
        assert len(set(tree[n])) == len(tree[n])


def test_count_popstacked_known_values():
    table = enumeration.count_popstacked(8)
    assert table.sequence() == KNOWN_COUNTS
    assert table.p(8) == 11877


def test_count_popstacked_n18_needs_exact_integers():
    assert enumeration.count_popstacked(18).p(18) == 643813226048935


def test_run_counts_match_oracle_and_two_run_formula():
    table = enumeration.count_popstacked(7, with_runs=True)
    for n in range(1, 8):
        assert {k: c for (m, k), c in table.runs.items() if m == n} == oracle.runs_table(n)
    for n in range(3, 8):
        assert table.p_nk(n, 2) == 2 ** n - 2 * n
    frame = table.triangle()
    assert list(frame.columns) == ["n", "k", "count"]
    assert int(frame["count"].sum()) == sum(KNOWN_COUNTS[:7])


def test_run_counts_above_one_are_even():
    table = enumeration.count_popstacked(8, with_runs=True)
    for n in range(1, 9):
        assert table.p(n) % 2 == 1
        assert table.p_nk(n, 1) == 1
        assert all(c % 2 == 0 for (m, k), c in table.runs.items() if m == n and k > 1)


@pytest.mark.parametrize("optimized", [True, False])
def test_state_table_both_ways(optimized):
    table = enumeration.state_table(7, optimized=optimized)
    assert table.sequence() == KNOWN_COUNTS[:7]
    assert sum(c for key, c in table.states.items() if key.n == 5) == 49


def test_state_table_agrees_with_tree_classes():
    table = enumeration.state_table(6)
    expected = {}
    for n in range(1, 7):
        for p in oracle.popstacked_set(n):
            key = enumeration.state_key(p)
            expected[key] = expected.get(key, 0) + 1
    assert table.states == dict(sorted(expected.items()))


def test_auxiliary_table_and_functional_equation():
    assert enumeration.check_auxiliary(7)
    result = enumeration.check_functional_equation(6)
    assert result["equal"]
    with pytest.raises(TruncationTooLarge):
        enumeration.check_functional_equation(40)


@pytest.mark.slow
def test_functional_equation_to_order_eight():
    result = enumeration.check_functional_equation(8)
    assert result["equal"] and not result["mismatches"]


def test_addition_count_grows_like_n_to_the_fourth():
    costs = [enumeration.addition_cost(n) for n in (10, 20)]
    assert costs[0] < costs[1]
    assert 8 < costs[1] / costs[0] < 32


@pytest.mark.slow
def test_addition_count_at_one_hundred_is_near_n4_over_8():
    started = time.perf_counter()
    additions = enumeration.addition_cost(100)
    elapsed = time.perf_counter() - started
    assert 0.8 <= additions / (100 ** 4 / 8) <= 1.2
    assert elapsed < 120
