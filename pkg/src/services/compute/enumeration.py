"""
Counting pop-stacked permutations through their generating tree.

Every pop-stacked permutation other than 1 and 12 has a unique parent,
obtained by shortening its last run. Grouping permutations by
(n, k, a, b, c) = (length, runs, smallest, second-largest and largest
entry of the last run) turns the tree into a recurrence, which is
evaluated here over exact Python integers held in numpy object arrays.
"""

from typing import Dict, Iterable, List, Optional, Tuple
from dataclasses import dataclass, field
import logging

import numpy as np
import pandas as pd

from src.services.config import FUNCTIONAL_EQUATION_MAX_N, IMAGE_MAX_N, STATE_TABLE_MAX_N
from src.services.compute.errors import NotPopStacked, RootPermutation, TooLarge, TruncationTooLarge
from src.services.compute.permutations import Permutation, block_bounds
from src.services.compute.popstacked import is_popstacked

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class StateKey:
    n: int
    k: int
    a: int
    b: int
    c: int


def state_key(p: Permutation) -> StateKey:
    """Class of p in the generating tree."""
    bounds = block_bounds(p.values, descending=False)
    start, stop = bounds[-1]
    last = p.values[start:stop]
    b = last[-2] if len(last) >= 2 else last[0]
    return StateKey(n=p.size, k=len(bounds), a=last[0], b=b, c=last[-1])


def _relabel(values: Tuple[int, ...], new_values: Iterable[int]) -> List[int]:
    # Old values fill the complement of new_values, in increasing order.
    taken = set(new_values)
    size = len(values) + len(taken)
    complement = [x for x in range(1, size + 1) if x not in taken]
    return [complement[v - 1] for v in values]


def expand(p: Permutation) -> List[Permutation]:
    """
    Children of p in the generating tree, sorted.

    Rule 1 appends a one-element run i (a < i <= c). Rule 2 appends a
    two-element run i < j (1 <= i <= c, a + 2 <= j <= n + 2). Rule 3
    inserts a new second-largest element i into the last run
    (b < i <= c). Existing values are relabelled around the new ones.

    Raises:
        NotPopStacked: If p is not pop-stacked
    """
    if not is_popstacked(p):
        raise NotPopStacked(f"{p} is not pop-stacked")
    key = state_key(p)
    n, a, b, c = key.n, key.a, key.b, key.c
    children = []
    for i in range(a + 1, c + 1):
        children.append(tuple(_relabel(p.values, (i,)) + [i]))
    for i in range(1, c + 1):
        for j in range(max(a + 2, i + 1), n + 3):
            children.append(tuple(_relabel(p.values, (i, j)) + [i, j]))
    for i in range(b + 1, c + 1):
        shifted = _relabel(p.values, (i,))
        children.append(tuple(shifted[:-1] + [i] + shifted[-1:]))
    return [Permutation._trusted(values) for values in sorted(children)]


def _standardize(values: List[int]) -> Tuple[int, ...]:
    rank = {v: r for r, v in enumerate(sorted(values), start=1)}
    return tuple(rank[v] for v in values)


def parent(p: Permutation) -> Permutation:
    """
    Unique predecessor of p: drop a last run of length <= 2, otherwise drop
    the second-largest entry of the last run, then relabel.

    Raises:
        RootPermutation: For the roots 1 and 12
        NotPopStacked: If p is not pop-stacked
    """
    if p.values in ((1,), (1, 2)):
        raise RootPermutation(f"{p} is a root of the generating tree")
    if not is_popstacked(p):
        raise NotPopStacked(f"{p} is not pop-stacked")
    start, stop = block_bounds(p.values, descending=False)[-1]
    values = list(p.values)
    if stop - start <= 2:
        del values[start:stop]
    else:
        del values[stop - 2]
    return Permutation._trusted(_standardize(values))


def generate_tree(max_n: int) -> Dict[int, List[Permutation]]:
    """
    Every node of the generating tree up to size max_n, grouped by size.

    Raises:
        TooLarge: If max_n exceeds the exhaustive limit
    """
    if max_n > IMAGE_MAX_N:
        raise TooLarge(f"tree generation is limited to n <= {IMAGE_MAX_N}")
    levels: Dict[int, List[Permutation]] = {n: [] for n in range(1, max_n + 1)}
    stack = [Permutation._trusted(root) for root in ((1,), (1, 2)) if len(root) <= max_n]
    while stack:
        p = stack.pop()
        levels[p.size].append(p)
        stack.extend(q for q in expand(p) if q.size <= max_n)
    for n, level in levels.items():
        level.sort()
        if len(set(level)) != len(level):
            logger.warning(f"generating tree reached some permutation of size {n} twice")
    return levels


@dataclass
class CountTable:
    """
    Counts produced by the recurrence.

    totals[n-1] = p_n; runs maps (n, k) to p_{n,k} when run counts were
    requested; states and auxiliary are only filled by state_table.
    """
    max_n: int
    totals: Tuple[int, ...]
    runs: Dict[Tuple[int, int], int] = field(default_factory=dict)
    states: Dict[StateKey, int] = field(default_factory=dict)
    auxiliary: Dict[Tuple[int, int, int, int], int] = field(default_factory=dict)
    additions: int = 0

    def p(self, n: int) -> int:
        return self.totals[n - 1]

    def p_nk(self, n: int, k: int) -> int:
        return self.runs.get((n, k), 0)

    def sequence(self) -> List[int]:
        return list(self.totals)

    def triangle(self) -> pd.DataFrame:
        rows = [{"n": n, "k": k, "count": count} for (n, k), count in sorted(self.runs.items())]
        return pd.DataFrame(rows, columns=["n", "k", "count"])


def _auxiliary(table: np.ndarray) -> np.ndarray:
    # d[..., a, A] = sum_b sum_{c >= A} p[..., a, b, c]
    column = table.sum(axis=-2)
    return np.flip(np.cumsum(np.flip(column, axis=-1), axis=-1), axis=-1)


def _one_more_run(table: np.ndarray) -> np.ndarray:
    shifted = np.zeros_like(table)
    shifted[1:] = table[:-1]
    return shifted


def _initial_slice(n: int, runs_axis: Optional[int]) -> np.ndarray:
    lead = (runs_axis,) if runs_axis else ()
    table = np.zeros(lead + (n + 2,) * 3, dtype=object)
    index = (1,) if runs_axis else ()
    table[index + ((1, 1, 1) if n == 1 else (1, 1, 2))] = 1
    return table


def _next_slice(n: int, prev1: np.ndarray, d1: np.ndarray, d2: np.ndarray,
                runs_axis: Optional[int]) -> Tuple[np.ndarray, int]:
    lead = (runs_axis,) if runs_axis else ()
    cur = np.zeros(lead + (n + 2,) * 3, dtype=object)
    if runs_axis:
        d1, d2 = _one_more_run(d1), _one_more_run(d2)
    additions = 0
    # A = B = C: a new one-element run
    for A in range(2, n + 1):
        cur[..., A, A, A] = d1[..., 1:A, A].sum(axis=-1)
        additions += A - 2
    for A in range(1, n):
        # A = B < C: a new two-element run, sum over a = A..C-2 per entry
        base = prev1[..., A, A, A]
        cur[..., A, A, A + 1] = base
        for C in range(A + 2, n + 1):
            cur[..., A, A, C] = base + d2[..., A:C - 1, A].sum(axis=-1)
            additions += C - A - 1
        # A < B < C: a longer last run
        for C in range(A + 2, n + 1):
            cur[..., A, A + 1:C, C] = np.cumsum(prev1[..., A, A:C - 1, C - 1], axis=-1)
            additions += C - A - 2
    return cur, additions


def _summation_additions(n: int) -> int:
    # backward recurrence for d over 1 <= a <= A <= n, then p_n = sum_a d[a][a]
    return (n + 2) * (n + 1) * n // 6 + n - 1


def count_popstacked(N: int, with_runs: bool = False) -> CountTable:
    """
    p_n for n = 1..N (and p_{n,k} when with_runs) by the optimized recurrence.

    Only the slices for lengths n-1 and n-2 are kept alive. Without run
    counts the tables are 3-dimensional over (a, b, c); with them a leading
    k axis is added.

    Args:
        N: Largest length
        with_runs: Also track the number of runs

    Returns:
        CountTable with totals, runs (if requested) and the addition tally
    """
    if N < 1:
        raise ValueError("N must be positive")
    runs_axis = N + 1 if with_runs else None
    totals: List[int] = []
    runs: Dict[Tuple[int, int], int] = {}
    additions = 0
    window: List[Tuple[np.ndarray, np.ndarray]] = []
    for n in range(1, N + 1):
        if n <= 2:
            cur, step = _initial_slice(n, runs_axis), 0
        else:
            (_, d2), (prev1, d1) = window
            cur, step = _next_slice(n, prev1, d1, d2, runs_axis)
        d = _auxiliary(cur)
        per_run = d.diagonal(axis1=-2, axis2=-1).sum(axis=-1)
        additions += step + _summation_additions(n)
        if with_runs:
            for k in range(1, n + 1):
                if per_run[k]:
                    runs[(n, k)] = int(per_run[k])
            totals.append(int(sum(per_run)))
        else:
            totals.append(int(per_run))
        window = (window + [(cur, d)])[-2:]
        logger.debug(f"p_{n} = {totals[-1]}")
    logger.info(f"counted pop-stacked permutations up to n={N} with {additions} additions")
    return CountTable(max_n=N, totals=tuple(totals), runs=runs, additions=additions)


def addition_cost(N: int) -> int:
    """Additions performed by count_popstacked(N) without run counts (about N^4/8)."""
    return count_popstacked(N, with_runs=False).additions


# Dict-based tables over (k, a, b, c), one per length.
_Layer = Dict[Tuple[int, int, int, int], int]


def _auxiliary_backward(layer: _Layer, n: int) -> Dict[Tuple[int, int, int], int]:
    column: Dict[Tuple[int, int, int], int] = {}
    for (k, a, b, c), count in layer.items():
        column[(k, a, c)] = column.get((k, a, c), 0) + count
    pairs = {(k, a) for k, a, _ in column}
    d: Dict[Tuple[int, int, int], int] = {}
    for k, a in pairs:
        running = 0
        for A in range(n, 0, -1):
            running += column.get((k, a, A), 0)
            if running:
                d[(k, a, A)] = running
    return d


def _auxiliary_direct(layer: _Layer, n: int) -> Dict[Tuple[int, int, int], int]:
    d: Dict[Tuple[int, int, int], int] = {}
    for A in range(1, n + 1):
        for (k, a, b, c), count in layer.items():
            if c >= A:
                d[(k, a, A)] = d.get((k, a, A), 0) + count
    return d


def _layer_optimized(n: int, prev1: _Layer, aux1, aux2) -> _Layer:
    layer: _Layer = {}
    for K in range(1, n + 1):
        for A in range(1, n + 1):
            total = sum(aux1.get((K - 1, a, A), 0) for a in range(1, A))
            if total:
                layer[(K, A, A, A)] = total
            for C in range(A + 1, n + 1):
                total = prev1.get((K, A, A, A), 0) + sum(aux2.get((K - 1, a, A), 0) for a in range(A, C - 1))
                if total:
                    layer[(K, A, A, C)] = total
                for B in range(A + 1, C):
                    if B - 1 > A:
                        total = layer.get((K, A, B - 1, C), 0) + prev1.get((K, A, B - 1, C - 1), 0)
                    else:
                        total = prev1.get((K, A, A, C - 1), 0)
                    if total:
                        layer[(K, A, B, C)] = total
    return layer


def _layer_direct(n: int, prev1: _Layer, prev2: _Layer) -> _Layer:
    layer: _Layer = {}
    for K in range(1, n + 1):
        one_less = [(key, count) for key, count in prev1.items() if key[0] == K - 1]
        two_less = [(key, count) for key, count in prev2.items() if key[0] == K - 1]
        for A in range(1, n + 1):
            total = sum(count for (_, a, _, c), count in one_less if a <= A - 1 and c >= A)
            if total:
                layer[(K, A, A, A)] = total
            for C in range(A + 1, n + 1):
                total = sum(count for (_, a, _, c), count in two_less if a <= C - 2 and c >= A)
                if total:
                    layer[(K, A, A, C)] = total
                for B in range(A + 1, C):
                    total = sum(prev1.get((K, A, b, C - 1), 0) for b in range(A, B))
                    if total:
                        layer[(K, A, B, C)] = total
    return layer


def state_table(N: int, optimized: bool = True) -> CountTable:
    """
    Full table of p_{n,k;a,b,c} for n <= N.

    Args:
        N: Largest length
        optimized: Use the auxiliary table and telescoped sums; otherwise
            evaluate the triple sums directly

    Raises:
        TooLarge: If N exceeds the dict-table limit
    """
    if N < 1:
        raise ValueError("N must be positive")
    if N > STATE_TABLE_MAX_N:
        raise TooLarge(f"full state tables are limited to n <= {STATE_TABLE_MAX_N}")
    layers: Dict[int, _Layer] = {1: {(1, 1, 1, 1): 1}, 2: {(1, 1, 1, 2): 1}}
    aux: Dict[int, Dict[Tuple[int, int, int], int]] = {}
    for n in range(1, N + 1):
        if n >= 3:
            if optimized:
                layers[n] = _layer_optimized(n, layers[n - 1], aux[n - 1], aux[n - 2])
            else:
                layers[n] = _layer_direct(n, layers[n - 1], layers[n - 2])
        aux[n] = _auxiliary_backward(layers[n], n)

    states: Dict[StateKey, int] = {}
    runs: Dict[Tuple[int, int], int] = {}
    totals: List[int] = []
    for n in range(1, N + 1):
        for (k, a, b, c), count in layers[n].items():
            states[StateKey(n, k, a, b, c)] = count
            runs[(n, k)] = runs.get((n, k), 0) + count
        totals.append(sum(layers[n].values()))
    auxiliary = {(n, k, a, A): value for n in range(1, N + 1) for (k, a, A), value in aux[n].items()}
    return CountTable(max_n=N, totals=tuple(totals), runs=dict(sorted(runs.items())),
                      states=dict(sorted(states.items())), auxiliary=auxiliary)


def check_auxiliary(N: int) -> bool:
    """Backward recurrence for d agrees with its defining double sum for all n <= N."""
    table = state_table(N)
    for n in range(1, N + 1):
        layer = {(key.k, key.a, key.b, key.c): count for key, count in table.states.items() if key.n == n}
        if _auxiliary_backward(layer, n) != _auxiliary_direct(layer, n):
            logger.warning(f"auxiliary table mismatch at n={n}")
            return False
    return True


# Truncated multivariate series in (z, u, v1, v2, v3).
_Monomial = Tuple[int, int, int, int, int]
_Series = Dict[_Monomial, int]

_ONE: _Monomial = (0, 0, 0, 0, 0)
_Z: _Monomial = (1, 0, 0, 0, 0)
_U: _Monomial = (0, 1, 0, 0, 0)
_V1: _Monomial = (0, 0, 1, 0, 0)
_V2: _Monomial = (0, 0, 0, 1, 0)
_V3: _Monomial = (0, 0, 0, 0, 1)


def _times(*monomials: _Monomial) -> _Monomial:
    return tuple(sum(parts) for parts in zip(*monomials))


def _term(monomial: _Monomial, coefficient: int = 1) -> _Series:
    return {monomial: coefficient}


def _add(*series: _Series, signs: Optional[Tuple[int, ...]] = None) -> _Series:
    out: _Series = {}
    for s, sign in zip(series, signs or (1,) * len(series)):
        for m, c in s.items():
            out[m] = out.get(m, 0) + sign * c
    return {m: c for m, c in out.items() if c}


def _mul(left: _Series, right: _Series, bound: int) -> _Series:
    out: _Series = {}
    for m1, c1 in left.items():
        for m2, c2 in right.items():
            m = tuple(x + y for x, y in zip(m1, m2))
            if max(m) > bound:
                continue
            out[m] = out.get(m, 0) + c1 * c2
    return {m: c for m, c in out.items() if c}


def _product(bound: int, *factors: _Series) -> _Series:
    result = _term(_ONE)
    for factor in factors:
        result = _mul(result, factor, bound)
    return result


def _geometric(monomial: _Monomial, bound: int) -> _Series:
    """1 / (1 - monomial), cut where an exponent exceeds bound."""
    out: _Series = {}
    power = _ONE
    while max(power) <= bound:
        out[power] = 1
        power = _times(power, monomial)
    return out


def _substitute(series: _Series, images: Tuple[_Monomial, ...], bound: int) -> _Series:
    """Replace each variable by a monomial, images ordered as (z, u, v1, v2, v3)."""
    out: _Series = {}
    for m, c in series.items():
        target = _times(*(tuple(e * x for x in image) for e, image in zip(m, images)))
        if max(target) <= bound:
            out[target] = out.get(target, 0) + c
    return {m: c for m, c in out.items() if c}


def _generating_series(N: int) -> _Series:
    table = state_table(N)
    series: _Series = {_ONE: 1}
    for key, count in table.states.items():
        series[(key.n, key.k, key.a, key.b, key.c)] = count
    return series


def check_functional_equation(N: int) -> Dict[str, object]:
    """
    Compare the multivariate generating function of the state table with
    the right-hand side of its functional equation, up to z^N.

    Both sides are expanded in the box where every exponent is at most N;
    inside that box the truncated arithmetic is exact.

    Returns:
        {"equal": bool, "monomials": int, "mismatches": first few differing monomials}

    Raises:
        TruncationTooLarge: If N exceeds the expansion limit
    """
    if N < 1:
        raise ValueError("N must be positive")
    if N > FUNCTIONAL_EQUATION_MAX_N:
        raise TruncationTooLarge(f"functional equation check is limited to N <= {FUNCTIONAL_EQUATION_MAX_N}")
    P = _generating_series(N)
    w = _times(_V1, _V2, _V3)
    x = _times(_V1, _V2)

    def sub(z=_Z, v1=_V1, v2=_V2, v3=_V3) -> _Series:
        return _substitute(P, (z, _U, v1, v2, v3), N)

    zv3 = _times(_Z, _V3)
    new_single = _product(
        N,
        _term(_times(_Z, _U, w)),
        _geometric(w, N),
        _add(_term(_ONE), _mul(_term(_times(_Z, w)), _geometric(x, N), N), signs=(1, -1)),
        _add(sub(v1=w, v2=_ONE, v3=_ONE), sub(v1=_ONE, v2=_ONE, v3=w), signs=(1, -1)),
    )
    new_pair_short = _product(
        N,
        _term(_times(_Z, _Z, _U, w, _V3)),
        _geometric(x, N),
        _geometric(_V3, N),
        _add(sub(v1=_V3, v2=_ONE, v3=_ONE), sub(v1=_ONE, v2=_ONE, v3=w), signs=(1, -1)),
    )
    new_pair_long = _product(
        N,
        _term(_times(_Z, _Z, _U, w, _V3, _V3)),
        _geometric(x, N),
        _geometric(_V3, N),
        _add(sub(z=zv3, v1=_ONE, v2=_ONE, v3=x), sub(z=zv3, v1=_ONE, v2=_ONE, v3=_ONE), signs=(1, -1)),
    )
    grow_last = _product(
        N,
        _term(_times(_Z, _V2, _V3)),
        _geometric(_V2, N),
        _add(P, sub(v2=_ONE, v3=_times(_V2, _V3)), signs=(1, -1)),
    )
    rhs = _add(
        _term(_ONE),
        _term(_times(_Z, _U, w)),
        _term(_times(_Z, _Z, _U, w, _V3)),
        new_single, new_pair_short, new_pair_long, grow_last,
    )
    lhs = {m: c for m, c in P.items() if max(m) <= N}
    difference = _add(lhs, rhs, signs=(1, -1))
    mismatches = sorted(difference.items())[:5]
    if difference:
        logger.warning(f"functional equation fails on {len(difference)} monomials up to z^{N}")
    return {"equal": not difference, "monomials": len(lhs), "mismatches": [list(m) + [c] for m, c in mismatches]}
