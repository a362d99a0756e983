"""
Permutations sorted by at most two flip passes, and their lattice walks.

A 2-pop-stack-sortable permutation of size n is encoded by a walk of n-1
steps: U at ascents, D at descents, and every U next to a D carries a
colour telling whether the ascent is regular (black) or twisted (red).
The generating functions below count these walks by length, ascents and
final altitude.
"""

from typing import Dict, Iterator, List, Optional, Tuple
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import product
from math import comb
import logging

import pandas as pd
from sympy.polys.domains import ZZ
from sympy.polys.ring_series import rs_mul, rs_series_inversion, rs_trunc
from sympy.polys.rings import PolyElement, ring

from src.services.config import BRIDGE_HALVING_MAX_N, DIAGONAL_MAX_K, DIAGONAL_MAX_ORDER
from src.services.compute.errors import InvalidColouring, Not2PSS, TooLarge
from src.services.compute.permutations import Permutation, block_bounds, build_layered, cost
from src.services.compute.series import (
    Polynomial,
    RationalFunction,
    TruncatedSeries,
    compose,
    series_expand,
    sqrt_series,
)

logger = logging.getLogger(__name__)

_, X, Y = ring("x,y", ZZ)


class Direction(Enum):
    UP = "U"
    DOWN = "D"


class Colour(Enum):
    BLACK = "+"
    RED = "-"


Step = Tuple[Direction, Colour]


@dataclass(frozen=True)
class ColouredWalk:
    """
    Walk with steps U and D where a U may be red only next to a D.

    Text form: "U+ U- D ..." with U+ a black up-step, U- a red up-step.
    """
    steps: Tuple[Step, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "ColouredWalk":
        tokens = {"U+": (Direction.UP, Colour.BLACK), "U-": (Direction.UP, Colour.RED),
                  "U": (Direction.UP, Colour.BLACK), "D": (Direction.DOWN, Colour.BLACK)}
        try:
            return cls(tuple(tokens[tok] for tok in text.split()))
        except KeyError as err:
            raise InvalidColouring(f"unknown step {err} in '{text}'") from err

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def altitude(self) -> int:
        return sum(1 if d is Direction.UP else -1 for d, _ in self.steps)

    def corner_adjacent(self, index: int) -> bool:
        """Whether step index has a D neighbour."""
        return any(0 <= j < len(self.steps) and self.steps[j][0] is Direction.DOWN
                   for j in (index - 1, index + 1))

    def is_valid(self) -> bool:
        for i, (direction, colour) in enumerate(self.steps):
            if colour is Colour.RED and (direction is Direction.DOWN or not self.corner_adjacent(i)):
                return False
        return True

    def __str__(self) -> str:
        return " ".join("D" if d is Direction.DOWN else f"U{c.value}" for d, c in self.steps)


def is_k_pss(p: Permutation, k: int) -> bool:
    """Whether at most k flip passes sort p."""
    return cost(p) <= k


def _falls(p: Permutation) -> List[Tuple[int, ...]]:
    return [p.values[start:stop] for start, stop in block_bounds(p.values, descending=True)]


def is_2pss_structural(p: Permutation) -> bool:
    """max(F_i) <= min(F_{i+1}) + 1 for every pair of adjacent falls."""
    falls = _falls(p)
    return all(left[0] <= right[-1] + 1 for left, right in zip(falls, falls[1:]))


def encode_2pss(p: Permutation) -> ColouredWalk:
    """
    Walk of a permutation sorted by two passes.

    Raises:
        Not2PSS: If p needs more than two passes
    """
    if not is_2pss_structural(p):
        raise Not2PSS(f"{p} is not sorted by two flip passes")
    values = p.values
    falls = _falls(p)
    twisted = {}
    position = 0
    for left, right in zip(falls, falls[1:]):
        position += len(left)
        twisted[position] = left[0] == right[-1] + 1
    steps = []
    for gap in range(1, len(values)):
        if values[gap - 1] > values[gap]:
            steps.append((Direction.DOWN, Colour.BLACK))
        else:
            steps.append((Direction.UP, Colour.RED if twisted[gap] else Colour.BLACK))
    return ColouredWalk(tuple(steps))


def decode_walk(w: ColouredWalk) -> Permutation:
    """
    Inverse of encode_2pss.

    One pass sends the permutation to a layered one whose ascents are the
    gaps inside falls and the black U steps; red U steps are its descents.
    Reversing every fall of that layered permutation recovers the original.

    Raises:
        InvalidColouring: If a red step is not a U next to a D
    """
    if not w.is_valid():
        raise InvalidColouring(f"walk '{w}' has a red step without an adjacent D")
    n = len(w) + 1
    block_sizes = [1]
    for direction, colour in w.steps:
        if direction is Direction.UP and colour is Colour.RED:
            block_sizes[-1] += 1
        else:
            block_sizes.append(1)
    sorted_once = build_layered(block_sizes).values
    values: List[int] = []
    start = 0
    for gap in range(1, n + 1):
        if gap == n or w.steps[gap - 1][0] is Direction.UP:
            values.extend(reversed(sorted_once[start:gap]))
            start = gap
    return Permutation._trusted(tuple(values))


def coloured_walks(length: int) -> Iterator[ColouredWalk]:
    """Every valid coloured walk with the given number of steps."""
    for directions in product((Direction.UP, Direction.DOWN), repeat=length):
        plain = ColouredWalk(tuple((d, Colour.BLACK) for d in directions))
        free = [i for i, d in enumerate(directions) if d is Direction.UP and plain.corner_adjacent(i)]
        for reds in product((False, True), repeat=len(free)):
            steps = list(plain.steps)
            for i, red in zip(free, reds):
                if red:
                    steps[i] = (Direction.UP, Colour.RED)
            yield ColouredWalk(tuple(steps))


@dataclass(frozen=True)
class BivariateRational:
    """Quotient of integer polynomials in x, y (elements of sympy's ZZ[x, y])."""
    numerator: PolyElement
    denominator: PolyElement

    def coefficients(self, n_max: int) -> Dict[Tuple[int, int], int]:
        """[x^n y^k] for n <= n_max (denominator must have constant term 1)."""
        if self.denominator.const() != 1:
            raise ValueError("denominator needs constant term 1")
        prec = n_max + 1
        inverse = rs_series_inversion(self.denominator, X, prec)
        expansion = rs_mul(rs_trunc(self.numerator, X, prec), inverse, X, prec)
        return {monom: int(c) for monom, c in expansion.terms()}

    def __str__(self) -> str:
        return f"({_format_bivariate(self.numerator)}) / ({_format_bivariate(self.denominator)})"


def _format_bivariate(poly: PolyElement) -> str:
    terms = []
    for (i, j), c in sorted(poly.terms()):
        c = int(c)
        monomial = "".join(v if e == 1 else f"{v}^{e}" for v, e in (("x", i), ("y", j)) if e)
        body = (str(abs(c)) if abs(c) != 1 or not monomial else "") + monomial
        terms.append(("-" if c < 0 else "+", body))
    text = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    return text + "".join(f" {sign} {body}" for sign, body in terms[1:])


def bivariate_gf() -> BivariateRational:
    """A(x, y) = x(1 + x^2 y) / (1 - x - xy - x^2 y - 2x^3 y^2), y marking ascents."""
    return BivariateRational(
        numerator=X * (1 + X ** 2 * Y),
        denominator=1 - X - X * Y - X ** 2 * Y - 2 * X ** 3 * Y ** 2,
    )


def twopss_table(n_max: int) -> pd.DataFrame:
    """a_{n,k} for 1 <= n <= n_max as columns n, k, count."""
    coefficients = bivariate_gf().coefficients(n_max)
    rows = [{"n": n, "k": k, "count": c} for (n, k), c in sorted(coefficients.items()) if n >= 1]
    return pd.DataFrame(rows, columns=["n", "k", "count"])


def _bridge_square(order: int) -> TruncatedSeries:
    """sqrt((1 + x)(1 - 7x)) = sqrt(1 - 6x - 7x^2)"""
    return sqrt_series(TruncatedSeries.from_polynomial(Polynomial((1, -6, -7)), order))


def _up_kernel(order: int) -> TruncatedSeries:
    """(1 - x - sqrt((1 + x)(1 - 7x))) / (2x)"""
    root = _bridge_square(order + 1)
    head = TruncatedSeries.from_polynomial(Polynomial((1, -1)), order + 1)
    return (head - root).shift_down(1) / 2


def bridge_gf(order: int) -> TruncatedSeries:
    """sqrt((1 + x) / (1 - 7x)); x marks pairs of steps."""
    ratio = series_expand(RationalFunction(Polynomial((1, 1)), Polynomial((1, -7))), order)
    return sqrt_series(ratio)


def diagonal_gf(k: int, order: int = 10) -> TruncatedSeries:
    """
    Generating function of a diagonal-parallel array of a_{n,k}.

    For k >= 0 the coefficients are a_{2n+k+1, n+k}; for k < 0 they are
    a_{2n+|k|+1, n}.

    Raises:
        TooLarge: If |k| or order exceed the configured limits
    """
    if abs(k) > DIAGONAL_MAX_K or order > DIAGONAL_MAX_ORDER:
        raise TooLarge(f"diagonals are limited to |k| <= {DIAGONAL_MAX_K} and order <= {DIAGONAL_MAX_ORDER}")
    kernel = _up_kernel(order)
    if k < 0:
        kernel = kernel * series_expand(RationalFunction(Polynomial.constant(1), Polynomial((1, 2))), order)
    return bridge_gf(order) * kernel ** abs(k)


def diagonal_closed_forms(n: int) -> Tuple[int, int]:
    """Both explicit sums for a_{2n+1, n}."""
    if n < 1:
        raise ValueError("n must be positive")
    alternating = sum((-1) ** i * 2 ** (n - i) * comb(2 * (n - i), n - i) * comb(n - 1, i) for i in range(n))
    weighted = sum(
        (comb(n, 2 * k) * comb(2 * k, k) * 2 ** (2 * k + 1) * Fraction(3) ** (n - 2 * k - 1)
         * (2 - Fraction(k, n)) for k in range(n // 2 + 1)),
        Fraction(0),
    )
    if weighted.denominator != 1:
        raise ArithmeticError(f"second closed form is not an integer at n={n}: {weighted}")
    return alternating, int(weighted)


# Walk tables map length -> {final altitude: count}.
WalkTable = Dict[int, Dict[int, int]]


def _shift(row: Dict[int, int], by: int, factor: int = 1) -> Dict[int, int]:
    return {h + by: c * factor for h, c in row.items()}


def _accumulate(*rows: Dict[int, int]) -> Dict[int, int]:
    out: Dict[int, int] = {}
    for row in rows:
        for h, c in row.items():
            out[h] = out.get(h, 0) + c
    return {h: c for h, c in out.items() if c}


def walk_table(order: int) -> WalkTable:
    """
    Coefficients of W(t, u, 2) = (1 + t^2) / (1 - t/u - tu - t^2 - 2t^3 u).

    Also the count of paths from (0,0) or (2,0) with steps (1,-1), (1,1),
    (2,0) and a bicoloured (3,1).
    """
    table: WalkTable = {}
    for n in range(order + 1):
        parts = [{0: 1}] if n in (0, 2) else []
        if n >= 1:
            parts += [_shift(table[n - 1], -1), _shift(table[n - 1], 1)]
        if n >= 2:
            parts.append(table[n - 2])
        if n >= 3:
            parts.append(_shift(table[n - 3], 1, 2))
        table[n] = _accumulate(*parts)
    return table


_START, _DOWN, _UP_CORNER, _UP_OPEN = range(4)


def _coloured_walk_states(order: int, floor: Optional[int]) -> List[Dict[Tuple[int, int], int]]:
    # A U not preceded by D has its colour decided when a D follows it.
    layers = [{(0, _START): 1}]
    for _ in range(order):
        nxt: Dict[Tuple[int, int], int] = {}
        for (h, kind), weight in layers[-1].items():
            up = (_UP_CORNER, 2) if kind == _DOWN else (_UP_OPEN, 1)
            down = (_DOWN, 2 if kind == _UP_OPEN else 1)
            for target, factor in (((h + 1, up[0]), up[1]), ((h - 1, down[0]), down[1])):
                if floor is not None and target[0] < floor:
                    continue
                nxt[target] = nxt.get(target, 0) + weight * factor
        layers.append(nxt)
    return layers


def coloured_walk_counts(order: int, floor: Optional[int] = None) -> WalkTable:
    """Coloured walks by length and final altitude, optionally never below floor."""
    table: WalkTable = {}
    for n, layer in enumerate(_coloured_walk_states(order, floor)):
        table[n] = _accumulate(*({h: w} for (h, _), w in layer.items()))
    return table


def alternate_model_counts(order: int, floor: Optional[int] = None, both_starts: bool = True) -> WalkTable:
    """Paths with steps (1,-1), (1,1), (2,0), bicoloured (3,1), by length and altitude."""
    table: WalkTable = {}
    for x in range(order + 1):
        parts = [{0: 1}] if x == 0 or (both_starts and x == 2) else []
        if x >= 1:
            parts += [_shift(table[x - 1], -1), _shift(table[x - 1], 1)]
        if x >= 2:
            parts.append(table[x - 2])
        if x >= 3:
            parts.append(_shift(table[x - 3], 1, 2))
        row = _accumulate(*parts)
        if floor is not None:
            row = {h: c for h, c in row.items() if h >= floor}
        table[x] = row
    return table


def excursion_gf(order: int) -> TruncatedSeries:
    """(1 + x - sqrt((1 + x)(1 - 7x))) / (4x): coloured walks that end at 0 and never dip below."""
    root = _bridge_square(order + 1)
    head = TruncatedSeries.from_polynomial(Polynomial((1, 1)), order + 1)
    return (head - root).shift_down(1) / 4


def alternate_excursion_gf(order: int) -> TruncatedSeries:
    """Excursions of the step-set model started at (0,0)."""
    inverse = series_expand(RationalFunction(Polynomial.constant(1), Polynomial((1, 2))), order)
    return _up_kernel(order) * inverse


def motzkin_numbers(count: int) -> List[int]:
    out = [1]
    for n in range(1, count):
        out.append(out[n - 1] + sum(out[i] * out[n - 2 - i] for i in range(n - 1)))
    return out


def motzkin_excursion_gf(order: int) -> TruncatedSeries:
    """1 + q M(q) with q = 2x / (1 - x)."""
    q = series_expand(RationalFunction(Polynomial((0, 2)), Polynomial((1, -1))), order)
    qm = TruncatedSeries(tuple([0] + motzkin_numbers(order)))
    return compose(qm, q) + 1


def central_binomial_bridge_gf(order: int) -> TruncatedSeries:
    """1 / sqrt(1 - 4s) at s = 2x / (1 + x)."""
    s = series_expand(RationalFunction(Polynomial((0, 2)), Polynomial((1, 1))), order)
    central = TruncatedSeries(tuple(comb(2 * m, m) for m in range(order + 1)))
    return compose(central, s)


def altitude_gf(k: int, order: int) -> TruncatedSeries:
    """W_{+k}(t, 2) (k >= 0) or W_{-|k|}(t, 2) (k < 0) as a series in t up to t^order."""
    half = (order - abs(k)) // 2
    diagonal = diagonal_gf(k, max(half, 0))
    coefficients = [0] * (order + 1)
    for n, c in enumerate(diagonal.coefficients):
        if abs(k) + 2 * n <= order:
            coefficients[abs(k) + 2 * n] = c
    return TruncatedSeries(tuple(coefficients))


@dataclass
class WalkModels:
    """Walk generating functions in x = t^2 unless noted."""
    order: int
    walks: WalkTable
    excursions: TruncatedSeries
    excursions_motzkin: TruncatedSeries
    alternate_excursions: TruncatedSeries
    bridges: TruncatedSeries
    bridges_from_excursions: TruncatedSeries
    bridges_central_binomial: TruncatedSeries
    altitudes: Dict[int, TruncatedSeries] = field(default_factory=dict)   # in t

    def consistent(self) -> bool:
        half = self.order // 2
        bridges_from_walks = [self.walks[2 * n].get(0, 0) for n in range(half + 1)]
        return (
            self.excursions == self.excursions_motzkin
            and self.bridges == self.bridges_from_excursions == self.bridges_central_binomial
            and list(self.bridges.coefficients) == bridges_from_walks
            and all(list(series.coefficients) == [self.walks[n].get(k, 0) for n in range(self.order + 1)]
                    for k, series in self.altitudes.items())
        )


def walk_model_gfs(order: int = 16, max_altitude: int = 3) -> WalkModels:
    """
    Every walk generating function, evaluated at y = 2.

    Args:
        order: Largest walk length (t-order); series in x go to order // 2
        max_altitude: Altitude series W_{+-k} are built for |k| <= max_altitude
    """
    half = order // 2
    excursions = excursion_gf(half)
    from_excursions = excursions / (2 - excursions)
    models = WalkModels(
        order=order,
        walks=walk_table(order),
        excursions=excursions,
        excursions_motzkin=motzkin_excursion_gf(half),
        alternate_excursions=alternate_excursion_gf(half),
        bridges=bridge_gf(half),
        bridges_from_excursions=from_excursions,
        bridges_central_binomial=central_binomial_bridge_gf(half),
        altitudes={k: altitude_gf(k, order) for k in range(-max_altitude, max_altitude + 1)},
    )
    logger.debug(f"walk models to order {order}: bridges {models.bridges}")
    return models


def check_substitution_identity(n_max: int) -> bool:
    """[t^a u^b] W(t, u, 2) equals [x^{a+1} y^{(a+b)/2}] A(x, y) for a < n_max."""
    walks = walk_table(n_max - 1)
    coefficients = bivariate_gf().coefficients(n_max)
    for a, row in walks.items():
        for b, count in row.items():
            if (a + b) % 2 or coefficients.get((a + 1, (a + b) // 2), 0) != count:
                return False
    expected = sum(1 for (n, _), c in coefficients.items() if 1 <= n <= n_max and c)
    return expected == sum(len(row) for row in walks.values())


def bridge_endings(n: int) -> Tuple[int, int]:
    """(all coloured bridges of length 2n, those whose last step is U)."""
    last = _coloured_walk_states(2 * n, None)[-1]
    total = sum(w for (h, _), w in last.items() if h == 0)
    ending_up = sum(w for (h, kind), w in last.items() if h == 0 and kind in (_UP_CORNER, _UP_OPEN))
    return total, ending_up


def bridge_halving_check(n: int) -> bool:
    """
    Exactly half of the 2-pss permutations of size 2n+1 with n ascents end
    with an ascent.

    Raises:
        TooLarge: If n exceeds the configured limit
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n > BRIDGE_HALVING_MAX_N:
        raise TooLarge(f"bridge halving check is limited to n <= {BRIDGE_HALVING_MAX_N}")
    total, ending_up = bridge_endings(n)
    logger.debug(f"bridges of length {2 * n}: {total}, ending with U: {ending_up}")
    return total == 2 * ending_up
