"""
Invariant suite behind ``verify all``.

Each suite is a plain function of n returning named boolean checks; the tool
runs the suites concurrently in worker threads and aggregates the verdicts.
Oracle comparisons are capped at the exhaustive limits from ``config``.
"""

from typing import Any, Callable, Dict, List
import asyncio
import logging

from src.services.config import EXHAUSTIVE_CHECK_MAX_N, IMAGE_MAX_N, MINIMIZED_REPORT_MAX_K, VERIFY_DEFAULT_N
from src.services.compute import automaton, enumeration, popstacked, sortable, worstcase
from src.services.compute.permutations import Permutation, cost, iterate, trajectory
from src.services.compute.series import series_expand
from src.services.data import formats, oracle
from src.services.tools.responses import error, success

logger = logging.getLogger(__name__)

Checks = Dict[str, bool]


def perm_core_suite(n: int) -> Checks:
    perms = list(oracle.all_permutations(n))
    costs = [cost(p) for p in perms]
    return {
        "cost_at_most_n_minus_1": max(costs) <= n - 1,
        "trajectory_length": all(len(trajectory(p)) == c + 1 for p, c in zip(perms, costs)),
        "identity_only_at_cost_0": sum(1 for c in costs if c == 0) == 1,
    }


def popstacked_suite(n: int) -> Checks:
    n = min(n, IMAGE_MAX_N)
    image = set(oracle.popstacked_set(n))
    perms = list(oracle.all_permutations(n))
    layered = [p for p in sorted(image) if popstacked.is_layered(p)]
    return {
        "test_matches_image": all(popstacked.is_popstacked(p) == (p in image) for p in perms),
        "canonical_preimage": all(iterate(popstacked.canonical_preimage(p), 1) == p for p in image),
        "layered_preimages": all(popstacked.preimages_layered(p) == oracle.preimage_set(p) for p in layered),
        "layered_count": popstacked.count_layered_popstacked(n) == len(layered),
    }


def enumeration_suite(n: int) -> Checks:
    n = min(n, IMAGE_MAX_N)
    counted = enumeration.count_popstacked(n, with_runs=True)
    images = [len(oracle.popstacked_set(m)) for m in range(1, n + 1)]
    runs = {(m, k): c for m in range(1, n + 1) for k, c in oracle.runs_table(m).items()}
    tree = enumeration.generate_tree(n)
    return {
        "totals_match_oracle": counted.sequence() == images,
        "runs_match_oracle": counted.runs == runs,
        "state_table_optimized": enumeration.state_table(n).sequence() == images,
        "state_table_direct": enumeration.state_table(n, optimized=False).sequence() == images,
        "auxiliary_table": enumeration.check_auxiliary(n),
        "tree_is_exact": all(tree[m] == oracle.popstacked_set(m) for m in range(1, n + 1)),
        "functional_equation": bool(enumeration.check_functional_equation(min(n, 8))["equal"]),
    }


def automaton_suite(n: int) -> Checks:
    n = min(n, IMAGE_MAX_N)
    runs = {(m, k): c for m in range(1, n + 1) for k, c in oracle.runs_table(m).items()}
    checks: Checks = {}
    for k in range(1, min(n, 4) + 1):
        built = automaton.build_Ak(k)
        words = automaton.count_words_sequence(built, n)
        expected = [runs.get((m, k), 0) for m in range(n + 1)]
        expected[0] = words[0]
        checks[f"A{k}_counts"] = words == expected
        checks[f"A{k}_minimized_counts"] = automaton.count_words_sequence(automaton.minimize(built), n) == words
        checks[f"P{k}_series"] = series_expand(automaton.pk_gf(k), n).integer_coefficients() == words
        checks[f"A{k}_state_recurrence"] = automaton.state_count(k) == automaton.state_count_recurrence(k)
    for k in range(1, 6):
        checks[f"P{k}_closed_form"] = automaton.pk_gf(k) == automaton.published_pk(k)
    return checks


def sortable_suite(n: int) -> Checks:
    perms = list(oracle.all_permutations(n))
    structural = all(sortable.is_2pss_structural(p) == (cost(p) <= 2) for p in perms)
    bijection = all(sortable.decode_walk(sortable.encode_2pss(p)) == p for p in perms if cost(p) <= 2)
    coefficients = sortable.bivariate_gf().coefficients(n)
    ascents = {k: c for (m, k), c in coefficients.items() if m == n}
    diagonal = sortable.diagonal_gf(0, 10).integer_coefficients()
    closed = all(len(set(sortable.diagonal_closed_forms(m))) == 1 and
                 sortable.diagonal_closed_forms(m)[0] == diagonal[m] for m in range(1, 11))
    return {
        "structural_test": structural,
        "walk_bijection": bijection,
        "ascent_table": ascents == oracle.ascent_table(n),
        "substitution_identity": sortable.check_substitution_identity(n),
        "diagonal_closed_forms": closed,
        "walk_models": sortable.walk_model_gfs().consistent(),
        "bridge_halving": all(sortable.bridge_halving_check(m) for m in range(1, 4)),
    }


def _witnesses_hold(n: int) -> bool:
    for m in range(n):
        width = n - 1 - m
        for i in range(1, n + 1):
            for j in range(max(1, i - width), min(n, i + width) + 1):
                if iterate(worstcase.coverage_witness(n, m, i, j), m).at(i) != j:
                    logger.warning(f"witness fails at n={n}, m={m}, i={i}, j={j}")
                    return False
    return True


def worstcase_suite(n: int) -> Checks:
    small = min(n, EXHAUSTIVE_CHECK_MAX_N)
    image_n = max(min(n, IMAGE_MAX_N), 2)
    image = set(oracle.image_of_Tm(image_n, image_n - 2))
    members = [p for p in oracle.all_permutations(image_n) if worstcase.is_im_n_minus_2(p)]
    return {
        "bandwidth_theorem": worstcase.verify_bandwidth_theorem(small),
        "majorization": worstcase.verify_majorization(small),
        "shadow_monotonicity": worstcase.verify_shadow_monotonicity(small),
        "skew_condition": worstcase.skew_condition_check(small),
        "coverage_witnesses": _witnesses_hold(min(n, 7)),
        "image_n_minus_2": set(members) == image,
        "preimage_n_minus_2": all(iterate(worstcase.preimage_n_minus_2(p), image_n - 2) == p for p in members),
        "rho_paths": all(worstcase.rho_paths(m, k).matches(worstcase.simulate_paths(worstcase.rho(m, k), k))
                         for m in range(2, n + 1) for k in range(1, m)),
    }


SUITES: Dict[str, Callable[[int], Checks]] = {
    "perm-core": perm_core_suite,
    "popstacked": popstacked_suite,
    "enumeration": enumeration_suite,
    "word-automaton": automaton_suite,
    "sortable": sortable_suite,
    "worstcase": worstcase_suite,
}


async def flipsort_verify(n: int = VERIFY_DEFAULT_N, suites: List[str] = None) -> Dict[str, Any]:
    """
    Runs the invariant suite against brute force over S_n.

    Args:
        n: Size used for the exhaustive comparisons (capped per suite)
        suites: Names of suites to run (default: all)
    """
    try:
        if n < 3:
            raise ValueError("verification needs n >= 3")
        names = list(SUITES) if suites is None else suites
        unknown = [name for name in names if name not in SUITES]
        if unknown:
            raise ValueError(f"unknown suites {unknown}; choose from {list(SUITES)}")
        results = await asyncio.gather(*(asyncio.to_thread(SUITES[name], n) for name in names))
        report = dict(zip(names, results))
        failed = [f"{name}.{check}" for name, checks in report.items() for check, ok in checks.items() if not ok]
        for item in failed:
            logger.warning(f"verification failed: {item}")
        skew = worstcase.skew_conjecture_report(n)
        minimized = await asyncio.to_thread(automaton.minimized_recurrence_report, MINIMIZED_REPORT_MAX_K)
        return success(
            "all checks passed" if not failed else f"{len(failed)} checks failed",
            n=n,
            passed=not failed,
            failed=failed,
            suites=report,
            skew_conjecture=skew.summary(),
            minimized_recurrence=formats.frame_records(minimized),
        )
    except Exception as err:
        return error(err, "verify")
