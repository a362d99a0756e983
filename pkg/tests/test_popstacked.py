"""
Tests for pop-stacked permutations: image test, pre-images and the layered family
"""

import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import pytest
from hypothesis import given, settings, strategies as st

from src.services.compute import popstacked
from src.services.compute.errors import NotLayeredPopstacked, NotPopStacked, SizeMismatch
from src.services.compute.permutations import Permutation, flip
from src.services.data import oracle


def perm(text):
    return Permutation.parse(text)


@given(st.integers(min_value=1, max_value=8).flatmap(lambda n: st.permutations(list(range(1, n + 1)))))
@settings(max_examples=200, deadline=None)
def test_image_of_flip_is_popstacked(values):
    image = flip(Permutation(values))
    assert popstacked.is_popstacked(image)
    assert flip(popstacked.canonical_preimage(image)) == image


@pytest.mark.parametrize("n", [3, 4, 5, 6, pytest.param(7, marks=pytest.mark.slow), pytest.param(8, marks=pytest.mark.slow)])
def test_membership_matches_brute_force(n):
    image = set(oracle.popstacked_set(n))
    for p in oracle.all_permutations(n):
        assert popstacked.is_popstacked(p) == (p in image)


def test_non_popstacked_has_no_canonical_preimage():
    assert not popstacked.is_popstacked(perm("21"))
    with pytest.raises(NotPopStacked):
        popstacked.canonical_preimage(perm("2134"[::-1]))


def test_shape_predicates_on_worked_examples():
    assert popstacked.is_layered(perm("213654"))
    assert popstacked.is_k_layered(perm("213654"), 3)
    assert not popstacked.is_k_layered(perm("213654"), 2)
    assert popstacked.is_skew_layered(perm("564123"))
    assert not popstacked.is_skew_layered(perm("213654"))
    assert popstacked.is_thin(perm("12435687"))
    assert not popstacked.is_thin(perm("213654"))


def test_layered_preimages_by_bars():
    found = {str(q) for q in popstacked.preimages_layered(perm("13254687"))}
    assert found == {"31528647", "13528647", "31258647", "31524867", "13524867"}
    assert [str(q) for q in popstacked.preimages_layered(perm("132"))] == ["312"]
    assert [str(q) for q in popstacked.preimages_layered(perm("213"))] == ["231"]


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7, pytest.param(8, marks=pytest.mark.slow)])
def test_layered_preimages_match_oracle(n):
    for p in oracle.popstacked_set(n):
        if popstacked.is_layered(p):
            found = popstacked.preimages_layered(p)
            assert found == oracle.preimage_set(p)
            assert popstacked.is_fibonacci_product(len(found))


def test_bars_reject_other_permutations():
    with pytest.raises(NotLayeredPopstacked):
        popstacked.preimages_layered(perm("2413"))
    with pytest.raises(NotLayeredPopstacked):
        popstacked.preimages_layered(perm("321"))


def test_layered_count_series():
    assert [popstacked.count_layered_popstacked(n) for n in range(1, 6)] == [1, 1, 3, 5, 9]
    for n in range(1, 8):
        layered = [p for p in oracle.popstacked_set(n) if popstacked.is_layered(p)]
        assert popstacked.count_layered_popstacked(n) == len(layered)


def test_fibonacci_products():
    assert popstacked.fibonacci_numbers(13) == [1, 2, 3, 5, 8, 13]
    assert popstacked.is_fibonacci_product(1)
    assert popstacked.is_fibonacci_product(4)
    assert popstacked.is_fibonacci_product(39)
    assert not popstacked.is_fibonacci_product(7)
    assert not popstacked.is_fibonacci_product(0)


def test_shape_predicates():
    assert popstacked.is_layered(perm("213654"))
    assert popstacked.is_skew_layered(perm("564123"))
    assert popstacked.is_thin(perm("12435687"))
    assert not popstacked.is_thin(perm("312"))


def test_intertwine():
    p, q = perm("21"), perm("12")
    assert str(popstacked.intertwine(p, q)) == "2314"
    assert popstacked.is_popstacked(popstacked.intertwine(p, q))
    with pytest.raises(SizeMismatch):
        popstacked.intertwine(perm("1"), perm("12"))


@pytest.mark.parametrize("n", [2, 4, 6])
def test_intertwine_lower_bound(n):
    result = popstacked.intertwine_lower_bound(n)
    assert result["bound"] == result["distinct"] == result["popstacked"]
    assert len(oracle.popstacked_set(n)) >= result["bound"]


@pytest.mark.parametrize("n", range(1, 8))
def test_appending_the_maximum_keeps_popstacked(n):
    for p in oracle.popstacked_set(n):
        assert popstacked.is_popstacked(Permutation(p.values + (n + 1,)))
