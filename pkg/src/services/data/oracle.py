"""
Brute-force ground truth over S_n for small n.

Everything here walks the whole symmetric group, so every entry point is
guarded by the limits in ``config``. The compute modules never import this
module; it referees them from the tests and from ``verify all``.
"""

from typing import Dict, Iterator, List, Tuple
from collections import Counter
from itertools import permutations as _itertools_permutations
import logging

import pandas as pd

from src.services.config import IMAGE_MAX_N, ORACLE_MAX_N
from src.services.compute.errors import TooLarge
from src.services.compute.permutations import (
    Permutation,
    block_bounds,
    cost_values,
    flip_values,
)

logger = logging.getLogger(__name__)


def _check_size(n: int, limit: int) -> None:
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if n > limit:
        raise TooLarge(f"exhaustive enumeration is limited to n <= {limit}, got {n}")


def _raw_permutations(n: int) -> Iterator[Tuple[int, ...]]:
    return _itertools_permutations(range(1, n + 1))


def all_permutations(n: int) -> Iterator[Permutation]:
    """Every element of S_n exactly once, in lexicographic order."""
    _check_size(n, ORACLE_MAX_N)
    for values in _raw_permutations(n):
        yield Permutation._trusted(values)


def _iterate_values(values: Tuple[int, ...], m: int) -> Tuple[int, ...]:
    for _ in range(m):
        values = flip_values(values)
    return values


def image_of_Tm(n: int, m: int) -> List[Permutation]:
    """{T^m(pi) : pi in S_n}, sorted."""
    _check_size(n, IMAGE_MAX_N)
    image = {_iterate_values(values, m) for values in _raw_permutations(n)}
    logger.debug(f"|Im(T^{m})| over S_{n} = {len(image)}")
    return [Permutation._trusted(values) for values in sorted(image)]


def preimage_set(p: Permutation) -> List[Permutation]:
    """{pi : T(pi) = p}, sorted."""
    _check_size(p.size, IMAGE_MAX_N)
    target = p.values
    return [Permutation._trusted(values) for values in _raw_permutations(p.size)
            if flip_values(values) == target]


def popstacked_set(n: int) -> List[Permutation]:
    return image_of_Tm(n, 1)


def runs_table(n: int) -> Dict[int, int]:
    """p_{n,k}: pop-stacked permutations of size n by number of runs."""
    counts: Counter = Counter()
    for p in popstacked_set(n):
        counts[len(block_bounds(p.values, descending=False))] += 1
    return dict(sorted(counts.items()))


def cost_distribution(n: int) -> Dict[int, int]:
    _check_size(n, ORACLE_MAX_N)
    counts = Counter(cost_values(values) for values in _raw_permutations(n))
    return dict(sorted(counts.items()))


def ascent_table(n: int) -> Dict[int, int]:
    """a_{n,k}: permutations of size n with cost <= 2 by number of ascents."""
    _check_size(n, ORACLE_MAX_N)
    counts: Counter = Counter()
    for values in _raw_permutations(n):
        if cost_values(values) <= 2:
            ascents = sum(1 for i in range(n - 1) if values[i] < values[i + 1])
            counts[ascents] += 1
    return dict(sorted(counts.items()))


def sorting_tree(n: int) -> pd.DataFrame:
    """
    The pop-stack-sorting tree on S_n.

    Returns:
        DataFrame with one row per permutation: its image under T (the parent
        edge; the identity is the root and maps to itself) and its depth, the cost.
    """
    _check_size(n, ORACLE_MAX_N)
    rows = []
    for values in _raw_permutations(n):
        p = Permutation._trusted(values)
        rows.append({
            "permutation": str(p),
            "image": str(Permutation._trusted(flip_values(values))),
            "depth": cost_values(values),
        })
    return pd.DataFrame(rows, columns=["permutation", "image", "depth"])
