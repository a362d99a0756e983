"""
Tests for the permutation core: parsing, runs and falls, the flip pass and its cost
"""

import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from itertools import permutations as raw_permutations

import pytest
from hypothesis import given, settings, strategies as st

from src.services.compute.errors import InnerRunOfSizeOne, InvalidPermutation
from src.services.compute.permutations import (
    FALLS,
    RUNS,
    Permutation,
    bandwidth,
    build_layered,
    build_skew_layered,
    build_thin,
    cost,
    decompose,
    falls,
    flip,
    inversions,
    iterate,
    run_lengths,
    runs,
    trajectory,
)


def permutations_up_to(max_n):
    return st.integers(min_value=1, max_value=max_n).flatmap(
        lambda n: st.permutations(list(range(1, n + 1)))
    ).map(Permutation)


@pytest.mark.parametrize("text", ["3276145", "3 2 7 6 1 4 5", "3,2,7,6,1,4,5", "[3, 2, 7, 6, 1, 4, 5]"])
def test_parse_accepts_every_textual_form(text):
    assert Permutation.parse(text).values == (3, 2, 7, 6, 1, 4, 5)


@pytest.mark.parametrize("text", ["", "112", "1 3", "abc", "[1, 1]", "1234567891"])
def test_parse_rejects_malformed_input(text):
    with pytest.raises(InvalidPermutation):
        Permutation.parse(text)


def test_large_permutations_print_with_spaces():
    p = Permutation.reverse_identity(10)
    assert str(p) == "10 9 8 7 6 5 4 3 2 1"
    assert Permutation.parse(str(p)) == p


def test_runs_and_falls():
    p = Permutation.parse("3276145")
    assert runs(p) == [(3,), (2, 7), (6,), (1, 4, 5)]
    assert falls(p) == [(3, 2), (7, 6, 1), (4,), (5,)]
    assert run_lengths(p) == [1, 2, 1, 3]
    assert decompose(p, FALLS).render(p) == "32|761|4|5"
    assert decompose(p, RUNS).blocks == ((1, 1), (2, 3), (4, 4), (5, 7))


def test_decompose_rejects_unknown_kind():
    with pytest.raises(ValueError):
        decompose(Permutation.identity(3), "peaks")


def test_flip_reverses_falls():
    assert str(flip(Permutation.parse("3276145"))) == "2316745"
    assert str(iterate(Permutation.parse("3276145"), 2)) == "2136475"


def test_trace_of_worked_example():
    chain = [str(q) for q in trajectory(Permutation.parse("3276145"))]
    assert chain == ["3276145", "2316745", "2136475", "1234657", "1234567"]
    assert cost(Permutation.parse("3276145")) == 4


def test_iterate_stops_at_identity():
    p = Permutation.parse("231")
    assert iterate(p, 50) == Permutation.identity(3)
    with pytest.raises(ValueError):
        iterate(p, -1)


def test_cost_distribution_of_s3():
    costs = sorted(cost(Permutation(values)) for values in raw_permutations(range(1, 4)))
    assert costs == [0, 1, 1, 1, 2, 2]


def test_inversions_small_and_merge_paths_agree():
    assert inversions(Permutation.parse("3276145")) == 10
    n = 12000
    p = Permutation.reverse_identity(n)
    assert inversions(p) == n * (n - 1) // 2


def test_builders():
    assert str(build_layered((2, 1, 3))) == "213654"
    assert str(build_skew_layered((2, 1, 3))) == "564123"
    assert str(build_thin((3, 4, 1))) == "12435687"
    assert bandwidth(build_thin((2, 2, 2))) == 1
    with pytest.raises(InnerRunOfSizeOne):
        build_thin((1, 1, 1))
    with pytest.raises(InvalidPermutation):
        build_layered(())


@given(permutations_up_to(7))
@settings(max_examples=200, deadline=None)
def test_cost_never_exceeds_n_minus_one(p):
    assert cost(p) <= p.size - 1
    assert len(trajectory(p)) == cost(p) + 1
    assert trajectory(p)[-1].is_identity()


@given(permutations_up_to(8))
@settings(max_examples=200, deadline=None)
def test_bandwidth_shrinks_by_one_per_pass(p):
    for m in range(p.size):
        assert bandwidth(iterate(p, m)) <= p.size - 1 - m


@given(permutations_up_to(9))
@settings(max_examples=100, deadline=None)
def test_positions_inverts_values(p):
    inverse = p.positions()
    assert all(p.at(inverse[v - 1]) == v for v in range(1, p.size + 1))
