from typing import Any, Dict, Optional

from src.services.compute import automaton
from src.services.compute.series import format_factors, format_polynomial, partial_fractions
from src.services.data import formats
from src.services.tools.responses import error, success

ACTIONS = ("build", "minimize", "gf", "report")


async def flipsort_automaton(action: str, k: int, n_max: Optional[int] = None) -> Dict[str, Any]:
    """
    Works with the automaton A_k recognising scanline words of pop-stacked
    permutations with k runs.

    Args:
        action: build (state count, recurrence, word counts), minimize,
            gf (rational generating function and partial fractions) or
            report (structure and minimization reports for 1..k)
        k: Number of runs
        n_max: Largest word length for the word-count sequence (default 2k + 4)
    """
    try:
        if action not in ACTIONS:
            raise ValueError(f"action must be one of {ACTIONS}, got '{action}'")
        if k < 1:
            raise ValueError("k must be positive")
        n_max = 2 * k + 4 if n_max is None else n_max
        if action == "report":
            return success(
                f"reports for k <= {k}",
                k=k,
                structure=formats.frame_records(automaton.pk_structure_report(k)),
                minimized=formats.frame_records(automaton.minimized_recurrence_report(max(k, 4))),
            )
        built = automaton.build_Ak(k)
        if action == "build":
            return success(
                f"A_{k} built",
                k=k,
                states=built.num_states,
                recurrence=automaton.state_count_recurrence(k),
                word_counts=automaton.count_words_sequence(built, n_max),
                export=formats.dfa_to_text(built),
            )
        if action == "minimize":
            reduced = automaton.minimize(built)
            return success(
                f"A_{k} minimized",
                k=k,
                states=built.num_states,
                minimized=reduced.num_states,
                word_counts=automaton.count_words_sequence(reduced, n_max),
                export=formats.dfa_to_text(reduced),
            )
        gf = automaton.dfa_to_gf(built)
        decomposition = partial_fractions(gf)
        return success(
            f"P_{k} computed",
            k=k,
            gf=str(gf),
            gf_text=formats.gf_to_text(gf),
            numerator=format_polynomial(gf.numerator),
            denominator=format_factors(gf.factored_denominator()),
            polynomial_part=format_polynomial(decomposition.polynomial_part),
            partial_fractions=[
                {"j": t.j, "exponent": t.exponent, "numerator": format_polynomial(t.numerator)}
                for t in decomposition.terms
            ],
            series=gf.series(n_max).integer_coefficients(),
        )
    except Exception as err:
        return error(err, "automaton")
