"""
Text codecs for the outputs of the flip-sort toolkit.

b-files follow the OEIS convention (one "n a(n)" line per term, 1-indexed,
no header). Tables are CSV through pandas. Automata and generating
functions have small line-oriented formats that parse back to equal objects.
"""

from typing import Dict, Iterable, List, Optional, Sequence, Tuple
from fractions import Fraction
from io import StringIO
import json
import logging

import numpy as np
import pandas as pd

from src.services.config import DIAGRAM_PRNG
from src.services.compute.automaton import Dfa
from src.services.compute.errors import FormatError
from src.services.compute.series import Polynomial, RationalFunction, format_rational

logger = logging.getLogger(__name__)


# === b-files ===

def to_bfile(values: Sequence[int], offset: int = 1) -> str:
    return "".join(f"{n} {int(v)}\n" for n, v in enumerate(values, start=offset))


def parse_bfile(text: str) -> Dict[int, int]:
    """Parse "n a(n)" lines; lines starting with # and blank lines are skipped."""
    terms: Dict[int, int] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"b-file line {number}: expected 'n a(n)', got '{line}'")
        try:
            terms[int(parts[0])] = int(parts[1])
        except ValueError as err:
            raise FormatError(f"b-file line {number}: {err}") from err
    return terms


# === CSV tables ===

def frame_to_csv(frame: pd.DataFrame, metadata: Optional[Dict[str, object]] = None) -> str:
    """CSV with optional "# key=value" metadata lines in front."""
    header = "".join(f"# {key}={value}\n" for key, value in (metadata or {}).items())
    return header + frame.to_csv(index=False)


def parse_csv(text: str) -> Tuple[pd.DataFrame, Dict[str, str]]:
    metadata: Dict[str, str] = {}
    for line in text.splitlines():
        if not line.startswith("#"):
            break
        key, _, value = line[1:].strip().partition("=")
        metadata[key.strip()] = value.strip()
    frame = pd.read_csv(StringIO(text), comment="#")
    return frame, metadata


def triangle_to_csv(frame: pd.DataFrame) -> str:
    missing = {"n", "k", "count"} - set(frame.columns)
    if missing:
        raise FormatError(f"triangle frame lacks columns {sorted(missing)}")
    return frame_to_csv(frame[["n", "k", "count"]])


def parse_triangle_csv(text: str) -> Dict[Tuple[int, int], int]:
    # counts past 2**63 come back as strings, so convert cell by cell
    frame = pd.read_csv(StringIO(text), dtype=str)
    return {(int(row.n), int(row.k)): int(row.count) for row in frame.itertuples(index=False)}


def dots_to_csv(frame: pd.DataFrame, n: int, seed: Optional[int] = None) -> str:
    """Diagram dots as m,i,value rows, with size, PRNG and seed in the metadata."""
    metadata: Dict[str, object] = {"n": n}
    if seed is not None:
        metadata.update({"prng": DIAGRAM_PRNG, "seed": seed})
    return frame_to_csv(frame[["m", "i", "value"]], metadata)


# === JSON ===

def _jsonable(value):
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Polynomial):
        return [format_rational(c) for c in value.coefficients]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def frame_records(frame: pd.DataFrame) -> List[Dict]:
    """Rows of a report frame as JSON-ready dicts (missing cells become None)."""
    rows = frame.astype(object).where(frame.notna(), None).to_dict(orient="records")
    return [_jsonable(row) for row in rows]


def to_json(payload) -> str:
    return json.dumps(_jsonable(payload), indent=2)


def sequence_to_json(values: Sequence[int], offset: int = 1) -> str:
    return to_json({"offset": offset, "values": [int(v) for v in values]})


def parse_sequence_json(text: str) -> Dict[int, int]:
    try:
        data = json.loads(text)
        return {n: int(v) for n, v in enumerate(data["values"], start=int(data.get("offset", 1)))}
    except (ValueError, KeyError, TypeError) as err:
        raise FormatError(f"not a sequence document: {err}") from err


# === Automata ===

def dfa_to_text(d: Dfa) -> str:
    """
    Header lines "# k", "# states", "# initial", "# accepting", then one
    "state<TAB>letter<TAB>target" line per defined transition.
    """
    lines = [
        f"# k {d.k}",
        f"# states {d.num_states}",
        f"# initial {d.initial}",
        "# accepting " + " ".join(str(s) for s in sorted(d.accepting)),
    ]
    for state in range(d.num_states):
        for letter in range(1, d.k + 1):
            target = int(d.transitions[state, letter - 1])
            if target >= 0:
                lines.append(f"{state}\t{letter}\t{target}")
    return "\n".join(lines) + "\n"


def parse_dfa_text(text: str) -> Dfa:
    header: Dict[str, List[int]] = {}
    rows: List[Tuple[int, int, int]] = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            if line.startswith("#"):
                key, *values = line[1:].split()
                header[key] = [int(v) for v in values]
            else:
                state, letter, target = (int(tok) for tok in line.split())
                rows.append((state, letter, target))
        except ValueError as err:
            raise FormatError(f"automaton line {number}: cannot parse '{line}'") from err
    try:
        k, states, initial = header["k"][0], header["states"][0], header["initial"][0]
    except (KeyError, IndexError) as err:
        raise FormatError(f"automaton header lacks {err}") from err
    table = np.full((states, k), -1, dtype=np.int64)
    for state, letter, target in rows:
        if not (0 <= state < states and 1 <= letter <= k and 0 <= target < states):
            raise FormatError(f"transition {state} -{letter}-> {target} out of range")
        table[state, letter - 1] = target
    return Dfa(k=k, labels=tuple(range(states)), initial=initial,
               transitions=table, accepting=frozenset(header.get("accepting", [])))


# === Generating functions ===

def _coefficients_text(p: Polynomial) -> str:
    return " ".join(format_rational(c) for c in p.coefficients) or "0"


def gf_to_text(f: RationalFunction) -> str:
    """Ascending coefficients "c0 c1 ... / d0 d1 ..." of the canonical form."""
    return f"{_coefficients_text(f.numerator)} / {_coefficients_text(f.denominator)}\n"


def parse_gf_text(text: str) -> RationalFunction:
    # " / " separates the polynomials; a bare "/" belongs to a rational coefficient
    numerator, sep, denominator = text.strip().partition(" / ")
    try:
        num = Polynomial(tuple(Fraction(tok) for tok in numerator.split()))
        den = Polynomial(tuple(Fraction(tok) for tok in denominator.split())) if sep else Polynomial.constant(1)
    except ValueError as err:
        raise FormatError(f"cannot parse generating function '{text.strip()}'") from err
    return RationalFunction(num, den)


def series_to_text(coefficients: Iterable[Fraction]) -> str:
    return " ".join(format_rational(c) for c in coefficients) + "\n"
