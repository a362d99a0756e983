"""
Tests for the brute-force ground truth over S_n
"""

import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from math import factorial

import pytest

from src.services.compute.errors import TooLarge
from src.services.compute.permutations import Permutation
from src.services.data import oracle


def test_all_permutations_is_lexicographic_and_complete():
    perms = [str(p) for p in oracle.all_permutations(3)]
    assert perms == ["123", "132", "213", "231", "312", "321"]
    assert sum(1 for _ in oracle.all_permutations(6)) == factorial(6)


def test_image_sizes():
    assert [len(oracle.popstacked_set(n)) for n in range(1, 8)] == [1, 1, 3, 11, 49, 263, 1653]
    assert [str(p) for p in oracle.image_of_Tm(3, 1)] == ["123", "132", "213"]
    assert len(oracle.image_of_Tm(5, 3)) == 7
    assert len(oracle.image_of_Tm(6, 4)) == 11


def test_preimage_set():
    assert [str(p) for p in oracle.preimage_set(Permutation.parse("132"))] == ["312"]
    assert [str(p) for p in oracle.preimage_set(Permutation.parse("123"))] == ["123", "132", "213", "321"]
    assert oracle.preimage_set(Permutation.parse("21")) == []


def test_tables():
    assert oracle.runs_table(4) == {1: 1, 2: 8, 3: 2}
    assert oracle.cost_distribution(3) == {0: 1, 1: 3, 2: 2}
    assert oracle.ascent_table(3) == {0: 1, 1: 4, 2: 1}
    assert sum(oracle.cost_distribution(7).values()) == factorial(7)


def test_sorting_tree():
    tree = oracle.sorting_tree(4)
    assert len(tree) == 24
    assert list(tree.columns) == ["permutation", "image", "depth"]
    root = tree[tree["permutation"] == "1234"].iloc[0]
    assert root["image"] == "1234" and root["depth"] == 0
    assert tree["depth"].max() == 3


def test_limits():
    with pytest.raises(TooLarge):
        list(oracle.all_permutations(11))
    with pytest.raises(TooLarge):
        oracle.image_of_Tm(10, 1)
    with pytest.raises(ValueError):
        oracle.popstacked_set(0)
