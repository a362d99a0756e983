"""
Run-word automata for pop-stacked permutations with exactly k runs.

A permutation is encoded by its scanline word (bottom-to-top run indices),
and the automaton A_k recognizes exactly the words of pop-stacked
permutations with k runs. Counting accepted words (transfer matrix) and
solving the state equations (rational generating function) give p_{n,k}.
"""

from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import comb
import logging

import numpy as np
import pandas as pd
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError

from src.services.compute.errors import NotARunWord, SingularSystem
from src.services.compute.permutations import Permutation, block_bounds
from src.services.compute.series import (
    RING,
    Z,
    Polynomial,
    RationalFunction,
    partial_fractions,
    superfactorial,
)

logger = logging.getLogger(__name__)

FIELD = RING.to_field()


@dataclass(frozen=True)
class Word:
    """Finite word over the alphabet {1..k}."""
    letters: Tuple[int, ...]
    k: int

    def __post_init__(self):
        letters = tuple(int(a) for a in self.letters)
        if self.k < 1 or any(a < 1 or a > self.k for a in letters):
            raise ValueError(f"letters {letters} are not all in 1..{self.k}")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def parse(cls, text: str, k: Optional[int] = None) -> "Word":
        """Separated letters ("1 2 1") or compact digits ("121")."""
        tokens = text.replace(",", " ").split()
        if len(tokens) == 1:
            tokens = list(tokens[0])
        letters = tuple(int(tok) for tok in tokens)
        return cls(letters, k if k is not None else max(letters, default=1))

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        sep = "" if self.k <= 9 else " "
        return sep.join(str(a) for a in self.letters)


def scanline(p: Permutation) -> Word:
    """Letter at position v is the index of the run containing value v."""
    bounds = block_bounds(p.values, descending=False)
    letters = [0] * p.size
    for index, (start, stop) in enumerate(bounds, start=1):
        for value in p.values[start:stop]:
            letters[value - 1] = index
    return Word(tuple(letters), len(bounds))


def scanline_inverse(w: Word) -> Permutation:
    """
    Rebuild the unique k-run permutation whose scanline is w.

    Raises:
        NotARunWord: If a letter is missing or some j+1 never precedes some j
    """
    k = w.k
    members: List[List[int]] = [[] for _ in range(k)]
    for value, letter in enumerate(w.letters, start=1):
        members[letter - 1].append(value)
    if any(not block for block in members):
        raise NotARunWord(f"{w} does not use every letter 1..{k}")
    for j in range(1, k):
        # some j+1 before some j  <=>  min(R_{j+1}) < max(R_j)
        if members[j][0] > members[j - 1][-1]:
            raise NotARunWord(f"in {w} no {j + 1} occurs before a {j}; runs {j} and {j + 1} would merge")
    return Permutation._trusted(tuple(v for block in members for v in block))


@dataclass(frozen=True, eq=False)
class Dfa:
    """
    Deterministic automaton over {1..k}.

    transitions[s, a-1] is the target of state s on letter a, or -1 when
    the map is partial.
    """
    k: int
    labels: Tuple
    initial: int
    transitions: np.ndarray
    accepting: FrozenSet[int]

    def __post_init__(self):
        table = np.array(self.transitions, dtype=np.int64).reshape(len(self.labels), self.k)
        table.setflags(write=False)
        object.__setattr__(self, "transitions", table)

    @property
    def num_states(self) -> int:
        return len(self.labels)

    def is_complete(self) -> bool:
        return bool((self.transitions >= 0).all())

    def run(self, letters: Sequence[int]) -> int:
        state = self.initial
        for a in letters:
            state = int(self.transitions[state, a - 1])
            if state < 0:
                return -1
        return state

    def accepts(self, letters: Sequence[int]) -> bool:
        return self.run(letters) in self.accepting


def _pair_bits(k: int) -> int:
    return (1 << (2 * (k - 1))) - 1


def decode_label(k: int, lset: int, cset: int) -> Tuple[FrozenSet[int], FrozenSet[Tuple[int, int]]]:
    """Bitmask state label -> (L, C) with C holding ordered adjacent pairs."""
    letters = frozenset(a for a in range(1, k + 1) if lset >> (a - 1) & 1)
    pairs = set()
    for j in range(1, k):
        if cset >> (2 * (j - 1)) & 1:
            pairs.add((j, j + 1))
        if cset >> (2 * (j - 1) + 1) & 1:
            pairs.add((j + 1, j))
    return letters, frozenset(pairs)


def build_Ak(k: int) -> Dfa:
    """
    Reachable part of the automaton A_k.

    A state (L, C) records the letters seen so far and, for adjacent letters
    j, j+1, which relative orders have occurred. Reading a adds a to L and
    records (b, a) for each neighbour b of a already in L. A word is accepted
    when L = {1..k} and both orders occurred for every adjacent pair.
    """
    if k < 1:
        raise ValueError("k must be positive")
    full_letters = (1 << k) - 1
    full_pairs = _pair_bits(k)
    index: Dict[Tuple[int, int], int] = {(0, 0): 0}
    order: List[Tuple[int, int]] = [(0, 0)]
    rows: List[List[int]] = []
    queue = deque([(0, 0)])
    while queue:
        lset, cset = queue.popleft()
        row = []
        for a in range(1, k + 1):
            new_c = cset
            if a > 1 and lset >> (a - 2) & 1:
                new_c |= 1 << (2 * (a - 2))        # (a-1, a)
            if a < k and lset >> a & 1:
                new_c |= 1 << (2 * (a - 1) + 1)    # (a+1, a)
            target = (lset | 1 << (a - 1), new_c)
            if target not in index:
                index[target] = len(order)
                order.append(target)
                queue.append(target)
            row.append(index[target])
        rows.append(row)
    accepting = frozenset(i for i, (lset, cset) in enumerate(order)
                          if lset == full_letters and cset == full_pairs)
    logger.debug(f"A_{k}: {len(order)} reachable states")
    return Dfa(
        k=k,
        labels=tuple(decode_label(k, lset, cset) for lset, cset in order),
        initial=0,
        transitions=np.array(rows, dtype=np.int64),
        accepting=accepting,
    )


def state_count(k: int) -> int:
    return build_Ak(k).num_states


def state_count_recurrence(k: int) -> int:
    """a_k from a_1 = 2, a_2 = 6, a_k = 4a_{k-1} - 2a_{k-2}."""
    a, b = 2, 6
    if k == 1:
        return a
    for _ in range(k - 2):
        a, b = b, 4 * b - 2 * a
    return b


def _complete(d: Dfa) -> Dfa:
    if d.is_complete():
        return d
    sink = d.num_states
    table = np.where(d.transitions < 0, sink, d.transitions)
    table = np.vstack([table, np.full((1, d.k), sink, dtype=np.int64)])
    return Dfa(k=d.k, labels=d.labels + ("sink",), initial=d.initial,
               transitions=table, accepting=d.accepting)


def _reachable(d: Dfa) -> List[int]:
    seen = [d.initial]
    marked = {d.initial}
    queue = deque([d.initial])
    while queue:
        s = queue.popleft()
        for t in d.transitions[s]:
            t = int(t)
            if t >= 0 and t not in marked:
                marked.add(t)
                seen.append(t)
                queue.append(t)
    return seen


def minimize(d: Dfa) -> Dfa:
    """
    Minimal complete automaton for the language of d.

    Completes d with a sink when needed, drops unreachable states, then
    refines the accepting/rejecting partition until it is stable. States
    of the result are numbered in breadth-first order from the initial
    state, so equal languages give identical automata.
    """
    d = _complete(d)
    reachable = _reachable(d)
    renumber = {s: i for i, s in enumerate(reachable)}
    table = np.array([[renumber[int(t)] for t in d.transitions[s]] for s in reachable], dtype=np.int64)
    accepting = np.array([s in d.accepting for s in reachable], dtype=np.int64)

    classes = accepting.copy()
    count = len(np.unique(classes))
    rounds = 0
    while True:
        signature = np.column_stack([classes, classes[table]])
        _, inverse = np.unique(signature, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        rounds += 1
        new_count = int(inverse.max()) + 1
        classes = inverse
        if new_count == count:
            break
        count = new_count
    logger.debug(f"minimize: {len(reachable)} -> {count} states in {rounds} rounds")

    start_class = int(classes[renumber[d.initial]])
    order = [start_class]
    position = {start_class: 0}
    representative = {}
    for s in range(len(reachable)):
        representative.setdefault(int(classes[s]), s)
    queue = deque([start_class])
    rows = []
    while queue:
        c = queue.popleft()
        row = []
        for t in table[representative[c]]:
            tc = int(classes[int(t)])
            if tc not in position:
                position[tc] = len(order)
                order.append(tc)
                queue.append(tc)
            row.append(position[tc])
        rows.append(row)
    members: Dict[int, List[int]] = {}
    for s, original in enumerate(reachable):
        members.setdefault(int(classes[s]), []).append(original)
    return Dfa(
        k=d.k,
        labels=tuple(tuple(members[c]) for c in order),
        initial=0,
        transitions=np.array(rows, dtype=np.int64),
        accepting=frozenset(i for i, c in enumerate(order) if accepting[representative[c]]),
    )


def transfer_matrix(d: Dfa) -> np.ndarray:
    """M[s, t] = number of letters leading from s to t (exact integers)."""
    matrix = np.zeros((d.num_states, d.num_states), dtype=object)
    for s in range(d.num_states):
        for t in d.transitions[s]:
            if t >= 0:
                matrix[s, int(t)] += 1
    return matrix


def count_words_sequence(d: Dfa, n_max: int) -> List[int]:
    """Accepted-word counts for lengths 0..n_max."""
    matrix = transfer_matrix(d)
    vector = np.zeros(d.num_states, dtype=object)
    vector[d.initial] = 1
    accepting = sorted(d.accepting)
    counts = []
    for _ in range(n_max + 1):
        counts.append(int(sum(vector[s] for s in accepting)))
        vector = vector.dot(matrix)
    return counts


def count_words(d: Dfa, n: int) -> int:
    """Number of accepted words of length n."""
    return count_words_sequence(d, n)[n]


# A partially solved unknown: numerator over a product of factor powers.
_Factored = Tuple[Polynomial, Dict[Polynomial, int]]


def _factored_add(terms: List[_Factored]) -> _Factored:
    common: Dict[Polynomial, int] = {}
    for _, factors in terms:
        for f, e in factors.items():
            common[f] = max(common.get(f, 0), e)
    total = Polynomial()
    for num, factors in terms:
        scale = Polynomial.constant(1)
        for f, e in common.items():
            missing = e - factors.get(f, 0)
            if missing:
                scale = scale * f ** missing
        total = total + num * scale
    return total, common


def _to_rational(value: _Factored) -> RationalFunction:
    num, factors = value
    den = Polynomial.constant(1)
    for f, e in factors.items():
        den = den * f ** e
    return RationalFunction(num, den)


def _strongly_connected(nodes: List[int], successors: Dict[int, List[int]]) -> List[List[int]]:
    # Tarjan, iterative; components come out sinks first.
    index_of: Dict[int, int] = {}
    low: Dict[int, int] = {}
    on_stack = set()
    stack: List[int] = []
    components: List[List[int]] = []
    counter = 0
    for root in nodes:
        if root in index_of:
            continue
        work = [(root, 0)]
        index_of[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, child = work[-1]
            succ = successors[node]
            if child < len(succ):
                work[-1] = (node, child + 1)
                nxt = succ[child]
                if nxt not in index_of:
                    index_of[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, 0))
                elif nxt in on_stack:
                    low[node] = min(low[node], index_of[nxt])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index_of[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                components.append(component)
    return components


def _to_field(value: RationalFunction):
    return FIELD(value.numerator.element) / FIELD(value.denominator.element)


def _from_field(value) -> RationalFunction:
    numerator = Polynomial.wrap(RING.from_dict(dict(value.numer.terms())))
    denominator = Polynomial.wrap(RING.from_dict(dict(value.denom.terms())))
    return RationalFunction(numerator, denominator)


def _solve_component(component: List[int], counts: Dict[int, Dict[int, int]],
                     accepting: FrozenSet[int], solved: Dict[int, _Factored]) -> Dict[int, RationalFunction]:
    # (I - zM) x = b over QQ(z) for a cyclic component, by LU on a DomainMatrix.
    z = FIELD(Z)
    members = {s: i for i, s in enumerate(component)}
    size = len(component)
    rows = []
    rhs = []
    for s in component:
        row = [FIELD.zero] * size
        row[members[s]] = FIELD.one
        outside = FIELD.one if s in accepting else FIELD.zero
        for t, c in counts[s].items():
            if t in members:
                row[members[t]] = row[members[t]] - c * z
            elif t in solved:
                outside = outside + c * z * _to_field(_to_rational(solved[t]))
        rows.append(row)
        rhs.append([outside])
    domain = FIELD.to_domain()
    system = DomainMatrix(rows, (size, size), domain)
    try:
        solution = system.lu_solve(DomainMatrix(rhs, (size, 1), domain)).to_list()
    except DMNonInvertibleMatrixError as exc:
        raise SingularSystem("state equations have no unique solution") from exc
    return {s: _from_field(solution[members[s]][0]) for s in component}


def dfa_to_gf(d: Dfa) -> RationalFunction:
    """
    Generating function sum_n (accepted words of length n) z^n.

    Solves x_s = [s accepting] + z * sum_a x_{delta(s, a)} component by
    component, sinks first. A component that is a single state with l
    self-loops is a pivot 1 - l z and needs only back-substitution; larger
    cyclic components are solved by LU over QQ(z).

    Raises:
        SingularSystem: If a cyclic component has a singular system
    """
    useful = _coreachable(d)
    counts: Dict[int, Dict[int, int]] = {}
    for s in useful:
        row: Dict[int, int] = {}
        for t in d.transitions[s]:
            t = int(t)
            if t in useful:
                row[t] = row.get(t, 0) + 1
        counts[s] = row
    if d.initial not in useful:
        return RationalFunction.of(0)
    nodes = sorted(useful)
    components = _strongly_connected(nodes, {s: list(counts[s]) for s in nodes})
    solved: Dict[int, _Factored] = {}
    z = Polynomial.variable()
    for component in components:
        if len(component) == 1:
            s = component[0]
            loops = counts[s].get(s, 0)
            terms: List[_Factored] = [(Polynomial.constant(1 if s in d.accepting else 0), {})]
            for t, c in counts[s].items():
                if t != s:
                    num, factors = solved[t]
                    terms.append((num * z * c, factors))
            num, factors = _factored_add(terms)
            if loops:
                pivot = Polynomial.linear_factor(loops)
                factors = dict(factors)
                factors[pivot] = factors.get(pivot, 0) + 1
            solved[s] = (num, factors)
        else:
            for s, value in _solve_component(component, counts, d.accepting, solved).items():
                solved[s] = (value.numerator, {value.denominator: 1})
    return _to_rational(solved[d.initial])


def _coreachable(d: Dfa) -> set:
    predecessors: Dict[int, List[int]] = {s: [] for s in range(d.num_states)}
    for s in range(d.num_states):
        for t in d.transitions[s]:
            if t >= 0:
                predecessors[int(t)].append(s)
    marked = set(d.accepting)
    queue = deque(d.accepting)
    while queue:
        t = queue.popleft()
        for s in predecessors[t]:
            if s not in marked:
                marked.add(s)
                queue.append(s)
    return marked & set(_reachable(d))


def minimized_recurrence_report(K: int) -> pd.DataFrame:
    """
    Minimized state counts b_k for k <= K against b_k = 3b_{k-1} - b_{k-2} - b_{k-3}.

    Returns:
        DataFrame with columns k, states, minimized, predicted, match
        (predicted and match are empty for k < 4)
    """
    if K < 4:
        raise ValueError("the recurrence needs K >= 4")
    rows = []
    minimized: List[int] = []
    for k in range(1, K + 1):
        automaton = build_Ak(k)
        b = minimize(automaton).num_states
        minimized.append(b)
        predicted = 3 * minimized[-2] - minimized[-3] - minimized[-4] if k >= 4 else None
        match = (predicted == b) if predicted is not None else None
        if match is False:
            logger.warning(f"b_{k} = {b} breaks the conjectured recurrence (predicted {predicted})")
        rows.append({"k": k, "states": automaton.num_states, "minimized": b,
                     "predicted": predicted, "match": match})
    logger.info(f"minimized state counts: {minimized}")
    return pd.DataFrame(rows, columns=["k", "states", "minimized", "predicted", "match"])


def pk_gf(k: int) -> RationalFunction:
    """P_k(z), the generating function of pop-stacked permutations with k runs."""
    return dfa_to_gf(build_Ak(k))


# P_1..P_5 in closed form: (lowest degree, numerator coefficients) over
# prod_{j=1}^{k} (1 - jz)^{k+1-j}.
_PUBLISHED_PK = {
    1: (1, (1,)),
    2: (3, (2,)),
    3: (4, (2, 6, -12)),
    4: (6, (42, -148, 10, 360, -288)),
    5: (7, (42, 396, -7712, 37964, -81162, 66120, 25568, -75200, 34560)),
}


def published_pk(k: int) -> RationalFunction:
    """Known closed form of P_k for k <= 5."""
    if k not in _PUBLISHED_PK:
        raise ValueError(f"closed forms are recorded for k <= {max(_PUBLISHED_PK)}, got {k}")
    lowest, coefficients = _PUBLISHED_PK[k]
    numerator = Polynomial((0,) * lowest + coefficients)
    return RationalFunction.from_factors(numerator, {j: k + 1 - j for j in range(1, k + 1)})


def nk_closed_form_1(k: int) -> Polynomial:
    """Conjectured closed form 3(k-1) - (k-1)(3k-4)z for the (1-(k-1)z)^2 numerator."""
    return Polynomial((3 * (k - 1), -(k - 1) * (3 * k - 4)))


def nk_observed_form_1(k: int) -> Polynomial:
    """3(k-2) - (k-1)(3k-4)z, the (1-(k-1)z)^2 numerator as computed for k <= 7."""
    return Polynomial((3 * (k - 2), -(k - 1) * (3 * k - 4)))


def nk_closed_form_2(k: int) -> Polynomial:
    """Conjectured closed form for the (1-(k-2)z)^3 numerator."""
    k = Fraction(k)
    return Polynomial((
        -(3 * k - 4) * (3 * k - 11) / 2,
        9 * k ** 3 - 57 * k ** 2 + 102 * k - 44,
        -9 * k ** 4 / 2 + 69 * k ** 3 / 2 - 90 * k ** 2 + 90 * k - 26,
    ))


def pk_structure_report(k_max: int) -> pd.DataFrame:
    """
    Structural observations on P_k for k = 1..k_max.

    Columns:
        numerator_degree / expected_degree: conjectured C(k+1, 2)
        leading / expected_leading: conjectured +-prod_{m<=k} m!
        coefficient_sum / expected_sum: conjectured +-2 prod_{m<k} m!
        lowest_degree / expected_lowest: floor(3k/2)
        shape_ok: polynomial part -1, coefficient 1 on 1/(1-kz), and
            exponent j+1 on (1-(k-j)z)
        n1, n1_closed_form, n1_match and n2, n2_closed_form, n2_match:
            partial-fraction numerators against their conjectured closed forms
        n1_observed_match: n1 against 3(k-2) - (k-1)(3k-4)z
    """
    rows = []
    for k in range(1, k_max + 1):
        gf = pk_gf(k)
        num = gf.numerator
        expected_leading = superfactorial(k)
        expected_sum = 2 * superfactorial(k - 1)
        decomposition = partial_fractions(gf)
        shape_ok = decomposition.polynomial_part == Polynomial.constant(-1)
        top = decomposition.term_for(k)
        shape_ok = shape_ok and top is not None and top.exponent == 1 and top.numerator == Polynomial.constant(1)
        for j in range(1, k):
            term = decomposition.term_for(k - j)
            shape_ok = shape_ok and term is not None and term.exponent == j + 1
        row = {
            "k": k,
            "numerator_degree": num.degree,
            "expected_degree": comb(k + 1, 2),
            "leading": str(num.leading_coefficient),
            "expected_leading": f"+-{expected_leading}",
            "leading_match": abs(num.leading_coefficient) == expected_leading,
            "coefficient_sum": str(num(1)),
            "expected_sum": f"+-{expected_sum}",
            "sum_match": abs(num(1)) == expected_sum,
            "lowest_degree": num.lowest_degree(),
            "expected_lowest": 3 * k // 2,
            "shape_ok": bool(shape_ok),
        }
        for j, closed_form in ((1, nk_closed_form_1), (2, nk_closed_form_2)):
            term = decomposition.term_for(k - j) if k > j else None
            row[f"n{j}"] = str(term.numerator) if term else None
            row[f"n{j}_closed_form"] = str(closed_form(k)) if term else None
            row[f"n{j}_match"] = (term.numerator == closed_form(k)) if term else None
        first = decomposition.term_for(k - 1) if k > 1 else None
        row["n1_observed_match"] = (first.numerator == nk_observed_form_1(k)) if first else None
        rows.append(row)
        logger.info(f"P_{k}: numerator degree {num.degree}, leading {num.leading_coefficient}")
    return pd.DataFrame(rows)
