"""
Pop-stacked permutations: the image of T.

Membership, the canonical pre-image, layered pre-image counting, the
layered/skew-layered/thin shape predicates and the intertwining lower bound.
"""

from typing import Dict, List, Optional, Sequence, Set, Tuple
from itertools import permutations as raw_permutations, product
import logging

from src.services.compute.errors import NotLayeredPopstacked, NotPopStacked, SizeMismatch
from src.services.compute.permutations import (
    FALLS,
    Permutation,
    bandwidth,
    block_bounds,
    build_layered,
    build_skew_layered,
    decompose,
    run_lengths,
)
from src.services.compute.series import Polynomial, RationalFunction, series_expand

logger = logging.getLogger(__name__)


def is_popstacked_values(values: Sequence[int]) -> bool:
    bounds = block_bounds(values, descending=False)
    # min of a run is its first entry, max its last
    return all(values[left[0]] < values[right[1] - 1] for left, right in zip(bounds, bounds[1:]))


def is_popstacked(p: Permutation) -> bool:
    """True iff p = T(pi) for some pi: every pair of adjacent runs overlaps."""
    return is_popstacked_values(p.values)


def canonical_preimage(p: Permutation) -> Permutation:
    """
    Reverse every run of a pop-stacked permutation.

    Raises:
        NotPopStacked: If p is not in the image of T
    """
    if not is_popstacked(p):
        raise NotPopStacked(f"{p} has two adjacent non-overlapping runs")
    values: List[int] = []
    for start, stop in block_bounds(p.values, descending=False):
        values.extend(reversed(p.values[start:stop]))
    return Permutation._trusted(tuple(values))


def is_layered(p: Permutation) -> bool:
    return build_layered(decompose(p, FALLS).lengths()) == p


def is_k_layered(p: Permutation, k: int) -> bool:
    """Layered with exactly k layers."""
    return is_layered(p) and len(decompose(p, FALLS).lengths()) == k


def is_skew_layered(p: Permutation) -> bool:
    return build_skew_layered(run_lengths(p)) == p


def is_thin(p: Permutation) -> bool:
    return bandwidth(p) <= 1


def _primary_has_free_neighbour(gap: int, barred: Dict[int, bool], last_gap: int) -> bool:
    # Undecided neighbours count as free, so partial assignments are pruned safely.
    for neighbour in (gap - 1, gap + 1):
        if 1 <= neighbour <= last_gap and not barred.get(neighbour, False):
            return True
    return False


def preimages_layered(p: Permutation) -> List[Permutation]:
    """
    All pre-images of a layered pop-stacked permutation, in lexicographic order.

    Primary bars go at every descent. Secondary bars go at a subset of the
    ascents such that each primary bar keeps at least one neighbouring gap
    without a bar; reversing every barred block gives a pre-image.

    Args:
        p: Layered pop-stacked permutation

    Returns:
        Sorted list of every pi with T(pi) = p

    Raises:
        NotLayeredPopstacked: If p is not layered or not pop-stacked
    """
    if not (is_layered(p) and is_popstacked(p)):
        raise NotLayeredPopstacked(f"{p} is not a layered pop-stacked permutation")
    values = p.values
    last_gap = len(values) - 1
    primary = [g for g in range(1, last_gap + 1) if values[g - 1] > values[g]]
    candidates = [g for g in range(1, last_gap + 1) if values[g - 1] < values[g]]
    barred: Dict[int, bool] = {g: True for g in primary}
    found: Set[Tuple[int, ...]] = set()

    def consistent() -> bool:
        return all(_primary_has_free_neighbour(g, barred, last_gap) for g in primary)

    def emit() -> None:
        cuts = [0] + sorted(g for g, bar in barred.items() if bar) + [len(values)]
        pre: List[int] = []
        for start, stop in zip(cuts, cuts[1:]):
            pre.extend(reversed(values[start:stop]))
        found.add(tuple(pre))

    def backtrack(index: int) -> None:
        if index == len(candidates):
            emit()
            return
        gap = candidates[index]
        for choice in (False, True):
            barred[gap] = choice
            if consistent():
                backtrack(index + 1)
        del barred[gap]

    backtrack(0)
    logger.debug(f"{p}: {len(found)} pre-images from {len(primary)} primary bars")
    return [Permutation._trusted(values_) for values_ in sorted(found)]


def fibonacci_numbers(limit: int) -> List[int]:
    """Fibonacci numbers 1, 2, 3, 5, ... up to limit."""
    out = [1, 2]
    while out[-1] + out[-2] <= limit:
        out.append(out[-1] + out[-2])
    return [f for f in out if f <= limit]


def is_fibonacci_product(value: int) -> bool:
    """Whether value is a product of Fibonacci numbers (1 counts as the empty product)."""
    if value < 1:
        return False
    factors = [f for f in fibonacci_numbers(value) if f > 1]

    def search(rest: int, start: int) -> bool:
        if rest == 1:
            return True
        return any(rest % f == 0 and search(rest // f, i) for i, f in enumerate(factors) if i >= start)

    return search(value, 0)


def layered_popstacked_gf() -> RationalFunction:
    """x + (x + x^2)^2 / (1 - x - x^2 - x^3)"""
    x = Polynomial.variable()
    head = RationalFunction(x)
    tail = RationalFunction((x + x * x) ** 2, Polynomial((1, -1, -1, -1)))
    return head + tail


def count_layered_popstacked(n: int) -> int:
    """|LI_n|, the tribonacci-type count of layered pop-stacked permutations."""
    if n < 1:
        raise ValueError("n must be positive")
    return int(series_expand(layered_popstacked_gf(), n)[n])


def intertwine(p: Permutation, q: Permutation) -> Permutation:
    """
    Interleave two equal-size permutations into a pop-stacked one.

    p supplies the odd positions with values 1..h, q the even positions
    with values h+1..2h, so every run is a (low, high) pair and adjacent
    runs always overlap. The map (p, q) -> result is injective.

    Raises:
        SizeMismatch: If p and q differ in size
    """
    if p.size != q.size:
        raise SizeMismatch(f"intertwine needs equal sizes, got {p.size} and {q.size}")
    half = p.size
    values: List[int] = []
    for low, high in zip(p.values, q.values):
        values.extend((low, high + half))
    return Permutation._trusted(tuple(values))


def intertwine_lower_bound(n: int) -> Dict[str, int]:
    """
    Count the distinct pop-stacked permutations produced by intertwining.

    Args:
        n: Even size

    Returns:
        {"bound": ((n/2)!)^2, "distinct": distinct outputs, "popstacked": outputs passing the test}
    """
    if n < 2 or n % 2:
        raise ValueError("intertwine lower bound needs an even n >= 2")
    half = n // 2
    halves = [Permutation._trusted(values) for values in raw_permutations(range(1, half + 1))]
    outputs = {intertwine(p, q) for p, q in product(halves, repeat=2)}
    bound = len(halves) ** 2
    return {
        "bound": bound,
        "distinct": len(outputs),
        "popstacked": sum(1 for sigma in outputs if is_popstacked(sigma)),
    }
