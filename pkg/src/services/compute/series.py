"""
Exact polynomial, rational-function and truncated power-series arithmetic.

Coefficients are exposed as ``fractions.Fraction`` tuples; the arithmetic
itself runs on sympy's sparse polynomial ring ``QQ[z]`` and its
``ring_series`` truncated-series routines, so nothing here ever rounds.
Generating functions throughout the package are built from these types.
"""

from typing import Dict, Iterable, List, Optional, Tuple, Union
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, prod
import logging

from sympy.polys.domains import QQ
from sympy.polys.ring_series import (
    rs_mul,
    rs_nth_root,
    rs_pow,
    rs_series_inversion,
    rs_subs,
    rs_trunc,
)
from sympy.polys.rings import PolyElement, ring

from src.services.compute.errors import (
    CompositionConstantTerm,
    NonSplittingDenominator,
    NonUnitConstantTerm,
    PoleAtOrigin,
)

logger = logging.getLogger(__name__)

Number = Union[int, Fraction]

RING, Z = ring("z", QQ)


def _qq(value: Number):
    value = Fraction(value)
    return QQ(value.numerator, value.denominator)


def _fraction(c) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


def _trim(coefficients: Iterable[Number]) -> Tuple[Fraction, ...]:
    coeffs = [Fraction(c) for c in coefficients]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


def _element_of(coefficients: Tuple[Fraction, ...], order: Optional[int] = None) -> PolyElement:
    limit = len(coefficients) if order is None else min(len(coefficients), order + 1)
    return RING.from_dict({(i,): _qq(coefficients[i]) for i in range(limit) if coefficients[i]})


def _coefficients_of(element: PolyElement, order: Optional[int] = None) -> Tuple[Fraction, ...]:
    if order is None:
        size = element.degree() + 1 if element else 0
    else:
        size = order + 1
    coeffs = [Fraction(0)] * size
    for (i,), c in element.terms():
        if i < size:
            coeffs[i] = _fraction(c)
    return tuple(coeffs)


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Polynomial:
    """Univariate polynomial, ascending coefficients, no trailing zeros."""
    coefficients: Tuple[Fraction, ...] = ()
    element: PolyElement = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coeffs = _trim(self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "element", _element_of(coeffs))

    @classmethod
    def wrap(cls, element: PolyElement) -> "Polynomial":
        """Adopt an element of ``QQ[z]`` without re-converting it."""
        poly = object.__new__(cls)
        object.__setattr__(poly, "coefficients", _coefficients_of(element))
        object.__setattr__(poly, "element", element)
        return poly

    @classmethod
    def constant(cls, value: Number) -> "Polynomial":
        return cls((value,))

    @classmethod
    def variable(cls) -> "Polynomial":
        return cls.wrap(Z)

    @classmethod
    def monomial(cls, degree: int, coefficient: Number = 1) -> "Polynomial":
        return cls((0,) * degree + (coefficient,))

    @classmethod
    def linear_factor(cls, j: int) -> "Polynomial":
        """1 - j z"""
        return cls((1, -j))

    @classmethod
    def from_factors(cls, factors: Dict[int, int], scale: Number = 1) -> "Polynomial":
        """scale * prod (1 - j z)^e"""
        element = RING(_qq(scale))
        for j, e in sorted(factors.items()):
            element = element * (1 - j * Z) ** e
        return cls.wrap(element)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def is_zero(self) -> bool:
        return not self.coefficients

    def coefficient(self, i: int) -> Fraction:
        return self.coefficients[i] if 0 <= i < len(self.coefficients) else Fraction(0)

    @property
    def constant_term(self) -> Fraction:
        return self.coefficient(0)

    @property
    def leading_coefficient(self) -> Fraction:
        return self.coefficients[-1] if self.coefficients else Fraction(0)

    def lowest_degree(self) -> int:
        return self.element.tail_degree() if self.coefficients else -1

    def __call__(self, x: Number) -> Fraction:
        return _fraction(self.element.evaluate(Z, _qq(x)))

    def __add__(self, other):
        other = _as_polynomial(other)
        if other is None:
            return NotImplemented
        return Polynomial.wrap(self.element + other.element)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial.wrap(-self.element)

    def __sub__(self, other):
        other = _as_polynomial(other)
        if other is None:
            return NotImplemented
        return Polynomial.wrap(self.element - other.element)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _as_polynomial(other)
        if other is None:
            return NotImplemented
        return Polynomial.wrap(self.element * other.element)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Polynomial":
        if exponent < 0:
            raise ValueError("negative polynomial power")
        if exponent == 0:
            return Polynomial.constant(1)
        return Polynomial.wrap(self.element ** exponent)

    def __divmod__(self, divisor: "Polynomial") -> Tuple["Polynomial", "Polynomial"]:
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        quotient, remainder = divmod(self.element, divisor.element)
        return Polynomial.wrap(quotient), Polynomial.wrap(remainder)

    def __floordiv__(self, divisor: "Polynomial") -> "Polynomial":
        return divmod(self, divisor)[0]

    def __mod__(self, divisor: "Polynomial") -> "Polynomial":
        return divmod(self, divisor)[1]

    def scale(self, factor: Number) -> "Polynomial":
        return Polynomial.wrap(self.element.mul_ground(_qq(factor)))

    def monic(self) -> "Polynomial":
        if self.is_zero():
            return self
        return Polynomial.wrap(self.element.monic())

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coefficients)

    def integer_coefficients(self) -> List[int]:
        if not self.is_integral():
            raise ValueError(f"{self} has non-integer coefficients")
        return [int(c) for c in self.coefficients]

    def __str__(self) -> str:
        return format_polynomial(self)


def _as_polynomial(value) -> Optional[Polynomial]:
    if isinstance(value, Polynomial):
        return value
    if isinstance(value, (int, Fraction)):
        return Polynomial.constant(value)
    return None


def format_polynomial(p: Polynomial, variable: str = "z") -> str:
    if p.is_zero():
        return "0"
    terms = []
    for i, c in enumerate(p.coefficients):
        if not c:
            continue
        magnitude = abs(c)
        sign = "-" if c < 0 else "+"
        if i == 0:
            body = format_rational(magnitude)
        else:
            power = variable if i == 1 else f"{variable}^{i}"
            body = power if magnitude == 1 else f"{format_rational(magnitude)}{power}"
        terms.append((sign, body))
    first_sign, first_body = terms[0]
    text = ("-" if first_sign == "-" else "") + first_body
    for sign, body in terms[1:]:
        text += f" {sign} {body}"
    return text


def polynomial_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic greatest common divisor (zero only when both inputs are zero)."""
    return Polynomial.wrap(a.element.gcd(b.element)).monic()


def extended_gcd(a: Polynomial, b: Polynomial) -> Tuple[Polynomial, Polynomial, Polynomial]:
    """(g, s, t) with s*a + t*b = g, g monic."""
    s, t, g = a.element.gcdex(b.element)
    return Polynomial.wrap(g), Polynomial.wrap(s), Polynomial.wrap(t)


def inverse_mod(a: Polynomial, modulus: Polynomial) -> Polynomial:
    g, s, _ = extended_gcd(a, modulus)
    if g.degree != 0:
        raise ZeroDivisionError("polynomial is not invertible modulo the given modulus")
    return s.scale(1 / g.constant_term) % modulus


@dataclass(frozen=True)
class RationalFunction:
    """
    Reduced fraction of polynomials.

    Canonical form: gcd(numerator, denominator) = 1 and the denominator's
    constant term is 1 when nonzero (monic otherwise). Equality of two
    rational functions is equality of their canonical forms.
    """
    numerator: Polynomial
    denominator: Polynomial = Polynomial((1,))

    def __post_init__(self):
        if self.denominator.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        num, den = self.numerator.element.cancel(self.denominator.element)
        norm = den.const() or den.LC
        object.__setattr__(self, "numerator", Polynomial.wrap(num.quo_ground(norm)))
        object.__setattr__(self, "denominator", Polynomial.wrap(den.quo_ground(norm)))

    @classmethod
    def of(cls, value) -> "RationalFunction":
        if isinstance(value, RationalFunction):
            return value
        return cls(_as_polynomial(value))

    @classmethod
    def from_factors(cls, numerator: Polynomial, factors: Dict[int, int]) -> "RationalFunction":
        return cls(numerator, Polynomial.from_factors(factors))

    def __add__(self, other):
        other = _as_rational(other)
        if other is None:
            return NotImplemented
        return RationalFunction(
            self.numerator * other.denominator + other.numerator * self.denominator,
            self.denominator * other.denominator,
        )

    __radd__ = __add__

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.numerator, self.denominator)

    def __sub__(self, other):
        other = _as_rational(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _as_rational(other)
        if other is None:
            return NotImplemented
        return RationalFunction(self.numerator * other.numerator, self.denominator * other.denominator)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_rational(other)
        if other is None:
            return NotImplemented
        if other.numerator.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self.numerator * other.denominator, self.denominator * other.numerator)

    def __rtruediv__(self, other):
        return _as_rational(other) / self

    def __pow__(self, exponent: int) -> "RationalFunction":
        if exponent < 0:
            return RationalFunction.of(1) / (self ** -exponent)
        return RationalFunction(self.numerator ** exponent, self.denominator ** exponent)

    def series(self, order: int) -> "TruncatedSeries":
        return series_expand(self, order)

    def factored_denominator(self) -> Dict[int, int]:
        scale, factors = factor_denominator(self.denominator)
        if scale != 1:
            raise NonSplittingDenominator(f"denominator {self.denominator} has constant term {scale}")
        return factors

    def __str__(self) -> str:
        num = format_polynomial(self.numerator)
        if self.denominator == Polynomial.constant(1):
            return num
        try:
            den = format_factors(self.factored_denominator())
        except NonSplittingDenominator:
            den = f"({format_polynomial(self.denominator)})"
        return f"({num}) / {den}"


def _as_rational(value) -> Optional[RationalFunction]:
    if isinstance(value, RationalFunction):
        return value
    poly = _as_polynomial(value)
    return RationalFunction(poly) if poly is not None else None


def format_factors(factors: Dict[int, int]) -> str:
    parts = []
    for j, e in sorted(factors.items()):
        base = "(1 - z)" if j == 1 else ("(1 + z)" if j == -1 else (f"(1 - {j}z)" if j > 0 else f"(1 + {-j}z)"))
        parts.append(base if e == 1 else f"{base}^{e}")
    return "(" + " ".join(parts) + ")" if parts else "1"


def factor_denominator(denominator: Polynomial) -> Tuple[Fraction, Dict[int, int]]:
    """
    Split a denominator as c * prod (1 - j z)^e over integers j.

    Factors over QQ with sympy; every irreducible factor must be linear,
    a z + b, with -a/b an integer.

    Raises:
        NonSplittingDenominator: If the constant term vanishes or a factor is not of that shape
    """
    scale = denominator.constant_term
    if not scale:
        raise NonSplittingDenominator("denominator vanishes at the origin")
    _, irreducible = denominator.element.factor_list()
    factors: Dict[int, int] = {}
    for factor, e in irreducible:
        if factor.degree() != 1:
            raise NonSplittingDenominator(f"{denominator} does not split into (1 - jz) factors")
        b, a = _coefficients_of(factor, order=1)
        j = -a / b
        if j.denominator != 1:
            raise NonSplittingDenominator(f"{denominator} has the non-integral root {1 / j}")
        factors[int(j)] = factors.get(int(j), 0) + e
    return scale, factors


@dataclass(frozen=True)
class PartialFractionTerm:
    """numerator / (1 - j z)^exponent with deg(numerator) < exponent"""
    j: int
    exponent: int
    numerator: Polynomial

    def as_rational(self) -> RationalFunction:
        return RationalFunction(self.numerator, Polynomial.linear_factor(self.j) ** self.exponent)


@dataclass(frozen=True)
class PartialFractions:
    polynomial_part: Polynomial
    terms: Tuple[PartialFractionTerm, ...]

    def term_for(self, j: int) -> Optional[PartialFractionTerm]:
        for term in self.terms:
            if term.j == j:
                return term
        return None

    def recombine(self) -> RationalFunction:
        total = RationalFunction(self.polynomial_part)
        for term in self.terms:
            total = total + term.as_rational()
        return total


def partial_fractions(f: RationalFunction) -> PartialFractions:
    """
    Decompose f as a polynomial plus sum_j N_j(z) / (1 - j z)^{e_j}.

    Each N_j has degree below e_j, so the decomposition is unique. N_j is
    the remainder times the inverse of the cofactor modulo (1 - j z)^{e_j}.

    Raises:
        NonSplittingDenominator: If the denominator is not a product of (1 - jz) powers
    """
    _, factors = factor_denominator(f.denominator)
    quotient, remainder = divmod(f.numerator, f.denominator)
    terms = []
    for j, e in sorted(factors.items()):
        block = Polynomial.linear_factor(j) ** e
        cofactor = f.denominator // block
        numerator = (remainder * inverse_mod(cofactor, block)) % block
        terms.append(PartialFractionTerm(j=j, exponent=e, numerator=numerator))
    return PartialFractions(polynomial_part=quotient, terms=tuple(terms))


@dataclass(frozen=True)
class TruncatedSeries:
    """Power-series prefix c_0..c_N; arithmetic never reads beyond order N."""
    coefficients: Tuple[Fraction, ...]
    element: PolyElement = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coeffs = tuple(Fraction(c) for c in self.coefficients)
        if not coeffs:
            raise ValueError("a truncated series needs at least the constant term")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "element", _element_of(coeffs))

    @classmethod
    def wrap(cls, element: PolyElement, order: int) -> "TruncatedSeries":
        """Adopt an element of ``QQ[z]``, reading coefficients up to z^order."""
        series = object.__new__(cls)
        object.__setattr__(series, "coefficients", _coefficients_of(element, order))
        object.__setattr__(series, "element", rs_trunc(element, Z, order + 1))
        return series

    @classmethod
    def zeros(cls, order: int) -> "TruncatedSeries":
        return cls((0,) * (order + 1))

    @classmethod
    def from_polynomial(cls, p: Polynomial, order: int) -> "TruncatedSeries":
        return cls.wrap(p.element, order)

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def __getitem__(self, index):
        return self.coefficients[index]

    def __len__(self) -> int:
        return len(self.coefficients)

    def truncate(self, order: int) -> "TruncatedSeries":
        return TruncatedSeries.wrap(self.element, min(order, self.order))

    def pad(self, order: int) -> "TruncatedSeries":
        return TruncatedSeries.wrap(self.element, max(order, self.order))

    def __add__(self, other):
        other = _as_series(other, self.order)
        return TruncatedSeries.wrap(self.element + other.element, min(self.order, other.order))

    __radd__ = __add__

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries.wrap(-self.element, self.order)

    def __sub__(self, other):
        return self + (-_as_series(other, self.order))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return TruncatedSeries.wrap(self.element.mul_ground(_qq(other)), self.order)
        return multiply(self, other)

    __rmul__ = __mul__

    def reciprocal(self) -> "TruncatedSeries":
        if not self[0]:
            raise PoleAtOrigin("series with zero constant term has no reciprocal")
        return TruncatedSeries.wrap(rs_series_inversion(self.element, Z, self.order + 1), self.order)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return TruncatedSeries.wrap(self.element.quo_ground(_qq(other)), self.order)
        return self * other.reciprocal()

    def __pow__(self, exponent: int) -> "TruncatedSeries":
        return power(self, exponent)

    def shift_down(self, m: int) -> "TruncatedSeries":
        """Divide by x^m; the first m coefficients must vanish."""
        if any(self.coefficients[:m]):
            raise PoleAtOrigin(f"series is not divisible by x^{m}")
        return TruncatedSeries(self.coefficients[m:])

    def shift_up(self, m: int) -> "TruncatedSeries":
        """Multiply by x^m, keeping the order."""
        return TruncatedSeries.wrap(self.element * Z ** m, self.order)

    def substitute_power(self, r: int) -> "TruncatedSeries":
        """x -> x^r (order grows to r * N)."""
        return TruncatedSeries.wrap(self.element.compose(Z, Z ** r), r * self.order)

    def integer_coefficients(self) -> List[int]:
        if any(c.denominator != 1 for c in self.coefficients):
            raise ValueError("series has non-integer coefficients")
        return [int(c) for c in self.coefficients]

    def __str__(self) -> str:
        return ", ".join(format_rational(c) for c in self.coefficients)


def _as_series(value, order: int) -> TruncatedSeries:
    if isinstance(value, TruncatedSeries):
        return value
    if isinstance(value, Polynomial):
        return TruncatedSeries.from_polynomial(value, order)
    return TruncatedSeries((value,) + (0,) * order)


def series_expand(f: RationalFunction, order: int) -> TruncatedSeries:
    """
    Maclaurin coefficients of a rational function up to z^order.

    Raises:
        PoleAtOrigin: If the denominator vanishes at 0
    """
    if not f.denominator.constant_term:
        raise PoleAtOrigin(f"{f} has a pole at the origin")
    prec = order + 1
    inverse = rs_series_inversion(f.denominator.element, Z, prec)
    return TruncatedSeries.wrap(rs_mul(rs_trunc(f.numerator.element, Z, prec), inverse, Z, prec), order)


def multiply(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    order = min(a.order, b.order)
    return TruncatedSeries.wrap(rs_mul(a.element, b.element, Z, order + 1), order)


def power(s: TruncatedSeries, exponent: int) -> TruncatedSeries:
    if exponent == 0:
        return _as_series(1, s.order)
    if exponent < 0 and not s[0]:
        raise PoleAtOrigin("series with zero constant term has no reciprocal")
    return TruncatedSeries.wrap(rs_pow(s.element, exponent, Z, s.order + 1), s.order)


def compose(outer: TruncatedSeries, inner: TruncatedSeries) -> TruncatedSeries:
    """
    outer(inner(x)) truncated to the smaller order.

    Raises:
        CompositionConstantTerm: If inner has a nonzero constant term
    """
    if inner[0]:
        raise CompositionConstantTerm("inner series must have zero constant term")
    order = min(outer.order, inner.order)
    prec = order + 1
    return TruncatedSeries.wrap(rs_subs(rs_trunc(outer.element, Z, prec), {Z: inner.element}, Z, prec), order)


def sqrt_series(s: TruncatedSeries) -> TruncatedSeries:
    """
    Square root of a series with constant term 1 (Newton iteration in
    ``rs_nth_root``).

    Raises:
        NonUnitConstantTerm: If s[0] != 1
    """
    if s[0] != 1:
        raise NonUnitConstantTerm(f"square root needs constant term 1, got {s[0]}")
    return TruncatedSeries.wrap(rs_nth_root(s.element, 2, Z, s.order + 1), s.order)


@lru_cache(maxsize=None)
def _eulerian_row(n: int) -> Tuple[int, ...]:
    # Index k = 0..n; row n counts permutations of size n by number of runs.
    if n == 0:
        return (1,)
    if n == 1:
        return (0, 1)
    prev = _eulerian_row(n - 1)
    row = [0] * (n + 1)
    for k in range(1, n + 1):
        left = prev[k - 1] if k - 1 < len(prev) else 0
        same = prev[k] if k < len(prev) else 0
        row[k] = (n - k + 1) * left + k * same
    return tuple(row)


def eulerian(n: int, k: int) -> int:
    """
    Number of permutations of size n with exactly k runs.

    Uses <n+1,k> = (n+2-k)<n,k-1> + k<n,k> with <1,1> = 1.
    """
    if n < 1 or k < 1 or k > n:
        return 0
    for i in range(1, n):
        _eulerian_row(i)
    return _eulerian_row(n)[k]


def eulerian_closed_form(n: int, k: int) -> int:
    return sum((-1) ** j * (k - j) ** n * comb(n + 1, j) for j in range(k))


def eulerian_column_gf(k: int) -> RationalFunction:
    """
    E_k(z) = 1/(1-kz) + sum_{j=1}^{k-1} (-1)^j ((k-j)z)^{j-1} / (1-(k-j)z)^{j+1}.
    """
    if k < 1:
        raise ValueError("k must be positive")
    total = RationalFunction(Polynomial.constant(1), Polynomial.linear_factor(k))
    for j in range(1, k):
        m = k - j
        numerator = Polynomial.monomial(j - 1, (-1) ** j * m ** (j - 1))
        total = total + RationalFunction(numerator, Polynomial.linear_factor(m) ** (j + 1))
    return total


def superfactorial(k: int) -> int:
    """prod_{m=1}^{k} m!"""
    return prod(factorial(m) for m in range(1, k + 1))
