"""
Permutations and the flip transformation.

A Permutation is an immutable one-line tuple of 1..n. T reverses every
maximal fall in one pass; cost(p) counts the passes needed to reach the
identity. Runs, falls, inversions and the block builders live here too.
"""

from typing import Iterator, List, Sequence, Tuple
from dataclasses import dataclass
import json
import logging
import re

import numpy as np

from src.services.config import COMPACT_DIGIT_MAX_N, INVERSIONS_MERGE_THRESHOLD
from src.services.compute.errors import InvalidPermutation, InnerRunOfSizeOne

logger = logging.getLogger(__name__)

RUNS = "runs"
FALLS = "falls"

_SEPARATORS = re.compile(r"[,\s]+")


@dataclass(frozen=True, order=True)
class Permutation:
    """A permutation of {1..n} in one-line notation (values are 1-based)."""
    values: Tuple[int, ...]

    def __post_init__(self):
        values = tuple(int(v) for v in self.values)
        n = len(values)
        if n == 0:
            raise InvalidPermutation("empty permutation")
        if sorted(values) != list(range(1, n + 1)):
            raise InvalidPermutation(f"{values} is not a permutation of 1..{n}")
        object.__setattr__(self, "values", values)

    @classmethod
    def _trusted(cls, values: Tuple[int, ...]) -> "Permutation":
        # Skips validation; callers guarantee a valid tuple of ints.
        obj = object.__new__(cls)
        object.__setattr__(obj, "values", values)
        return obj

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def reverse_identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n, 0, -1)))

    @classmethod
    def parse(cls, text: str) -> "Permutation":
        """
        Parse the textual permutation format.

        Accepts space- or comma-separated integers ("3 2 7 6 1 4 5"), a JSON
        array ("[3, 2, 7]") and the compact digit form ("3276145") for n <= 9.

        Args:
            text: Permutation text

        Returns:
            Parsed Permutation

        Raises:
            InvalidPermutation: On malformed input
        """
        stripped = text.strip()
        if not stripped:
            raise InvalidPermutation("empty permutation")
        try:
            if stripped.startswith("["):
                return cls(tuple(json.loads(stripped)))
            if _SEPARATORS.search(stripped):
                return cls(tuple(int(tok) for tok in _SEPARATORS.split(stripped) if tok))
        except (ValueError, TypeError) as err:
            if isinstance(err, InvalidPermutation):
                raise
            raise InvalidPermutation(f"cannot parse '{text}': {err}") from err
        if not stripped.isdigit():
            raise InvalidPermutation(f"cannot parse '{text}'")
        if len(stripped) > COMPACT_DIGIT_MAX_N:
            raise InvalidPermutation(
                f"compact digit form needs n <= {COMPACT_DIGIT_MAX_N}; separate values with spaces"
            )
        return cls(tuple(int(ch) for ch in stripped))

    @property
    def size(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[int]:
        return iter(self.values)

    def __getitem__(self, index):
        return self.values[index]

    def at(self, position: int) -> int:
        """Value at a 1-based position."""
        return self.values[position - 1]

    def is_identity(self) -> bool:
        return all(v == i for i, v in enumerate(self.values, start=1))

    def positions(self) -> Tuple[int, ...]:
        """1-based position of each value 1..n (the inverse permutation)."""
        inverse = [0] * len(self.values)
        for position, value in enumerate(self.values, start=1):
            inverse[value - 1] = position
        return tuple(inverse)

    def __str__(self) -> str:
        if len(self.values) <= COMPACT_DIGIT_MAX_N:
            return "".join(str(v) for v in self.values)
        return " ".join(str(v) for v in self.values)


@dataclass(frozen=True)
class Decomposition:
    """Runs or falls of a permutation as 1-based inclusive position intervals"""
    kind: str
    blocks: Tuple[Tuple[int, int], ...]

    def pieces(self, p: Permutation) -> List[Tuple[int, ...]]:
        return [p.values[start - 1:end] for start, end in self.blocks]

    def lengths(self) -> List[int]:
        return [end - start + 1 for start, end in self.blocks]

    def render(self, p: Permutation) -> str:
        joiner = "" if p.size <= COMPACT_DIGIT_MAX_N else " "
        return "|".join(joiner.join(str(v) for v in piece) for piece in self.pieces(p))


def block_bounds(values: Sequence[int], descending: bool) -> List[Tuple[int, int]]:
    """Maximal monotone blocks as 0-based half-open (start, stop) pairs."""
    bounds = []
    n = len(values)
    start = 0
    for i in range(1, n):
        if (values[i] < values[i - 1]) != descending:
            bounds.append((start, i))
            start = i
    if n:
        bounds.append((start, n))
    return bounds


def decompose(p: Permutation, kind: str) -> Decomposition:
    """
    Split a permutation into maximal runs or maximal falls.

    Args:
        p: Permutation
        kind: RUNS ("runs") or FALLS ("falls")

    Returns:
        Decomposition with 1-based inclusive blocks covering 1..n in order
    """
    if kind not in (RUNS, FALLS):
        raise ValueError(f"kind must be '{RUNS}' or '{FALLS}', got '{kind}'")
    bounds = block_bounds(p.values, descending=(kind == FALLS))
    return Decomposition(kind=kind, blocks=tuple((start + 1, stop) for start, stop in bounds))


def runs(p: Permutation) -> List[Tuple[int, ...]]:
    """Value contents of the runs, left to right."""
    return [p.values[start:stop] for start, stop in block_bounds(p.values, descending=False)]


def falls(p: Permutation) -> List[Tuple[int, ...]]:
    """Value contents of the falls, left to right."""
    return [p.values[start:stop] for start, stop in block_bounds(p.values, descending=True)]


def run_lengths(p: Permutation) -> List[int]:
    return [stop - start for start, stop in block_bounds(p.values, descending=False)]


def flip_values(values: Tuple[int, ...]) -> Tuple[int, ...]:
    """One pop-stack pass on a raw value tuple: reverse every maximal fall."""
    out: List[int] = []
    n = len(values)
    i = 0
    while i < n:
        j = i + 1
        while j < n and values[j] < values[j - 1]:
            j += 1
        if j - i == 1:
            out.append(values[i])
        else:
            out.extend(values[j - 1:i - 1 if i else None:-1])
        i = j
    return tuple(out)


def flip(p: Permutation) -> Permutation:
    """The flip transformation T: reverse every maximal fall in place."""
    return Permutation._trusted(flip_values(p.values))


def iterate(p: Permutation, m: int) -> Permutation:
    """T^m(p)."""
    if m < 0:
        raise ValueError("iteration count must be nonnegative")
    values = p.values
    for _ in range(m):
        nxt = flip_values(values)
        if nxt == values:
            break
        values = nxt
    return Permutation._trusted(values)


def _is_sorted(values: Tuple[int, ...]) -> bool:
    return all(values[i] < values[i + 1] for i in range(len(values) - 1))


def cost_values(values: Tuple[int, ...]) -> int:
    steps = 0
    while not _is_sorted(values):
        values = flip_values(values)
        steps += 1
    return steps


def cost(p: Permutation) -> int:
    """Smallest m with T^m(p) equal to the identity; never exceeds n-1."""
    return cost_values(p.values)


def trajectory(p: Permutation) -> List[Permutation]:
    """[p, T(p), ..., identity], of length cost(p) + 1."""
    chain = [p]
    values = p.values
    while not _is_sorted(values):
        values = flip_values(values)
        chain.append(Permutation._trusted(values))
    return chain


def bandwidth(p: Permutation) -> int:
    """Maximum displacement max |a_i - i|."""
    arr = np.asarray(p.values, dtype=np.int64)
    return int(np.abs(arr - np.arange(1, arr.size + 1)).max())


def _merge_count(values: List[int]) -> Tuple[List[int], int]:
    if len(values) <= 1:
        return values, 0
    mid = len(values) // 2
    left, left_count = _merge_count(values[:mid])
    right, right_count = _merge_count(values[mid:])
    merged = []
    count = left_count + right_count
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            count += len(left) - i
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    return merged, count


def inversions(p: Permutation) -> int:
    """Number of pairs i < j with a_i > a_j."""
    values = p.values
    n = len(values)
    if n > INVERSIONS_MERGE_THRESHOLD:
        return _merge_count(list(values))[1]
    return sum(1 for i in range(n) for j in range(i + 1, n) if values[i] > values[j])


def _check_parts(parts: Sequence[int]) -> List[int]:
    parts = [int(m) for m in parts]
    if not parts or any(m < 1 for m in parts):
        raise InvalidPermutation(f"parts must be a nonempty sequence of positive integers, got {parts}")
    return parts


def build_layered(parts: Sequence[int]) -> Permutation:
    """Direct sum of decreasing blocks, e.g. (2,1,3) -> 213654."""
    values: List[int] = []
    offset = 0
    for m in _check_parts(parts):
        values.extend(range(offset + m, offset, -1))
        offset += m
    return Permutation._trusted(tuple(values))


def build_skew_layered(parts: Sequence[int]) -> Permutation:
    """Skew sum of increasing blocks, e.g. (2,1,3) -> 564123."""
    parts = _check_parts(parts)
    remaining = sum(parts)
    values: List[int] = []
    for m in parts:
        values.extend(range(remaining - m + 1, remaining + 1))
        remaining -= m
    return Permutation._trusted(tuple(values))


def build_thin(run_lengths_: Sequence[int]) -> Permutation:
    """
    The unique thin permutation (bandwidth <= 1) with the given run lengths.

    Inner runs (all but the first and last) must have length at least 2.

    Args:
        run_lengths_: Lengths of the runs, left to right

    Returns:
        Thin permutation, e.g. (3,4,1) -> 12435687

    Raises:
        InnerRunOfSizeOne: If an inner run has length 1
    """
    lengths = _check_parts(run_lengths_)
    if any(r == 1 for r in lengths[1:-1]):
        raise InnerRunOfSizeOne(f"inner runs of a thin permutation have length >= 2, got {lengths}")
    n = sum(lengths)
    s = len(lengths)
    values: List[int] = []
    start = 1
    for index, r in enumerate(lengths):
        stop = start + r - 1  # positions start..stop
        first = index == 0
        last = index == s - 1
        if first and last:
            block = list(range(1, n + 1))
        elif first:
            block = list(range(1, stop)) + [stop + 1]
        elif last:
            block = [start - 1] + list(range(start + 1, n + 1))
        else:
            block = [start - 1] + list(range(start + 1, stop)) + [stop + 1]
        values.extend(block)
        start = stop + 1
    return Permutation._trusted(tuple(values))
