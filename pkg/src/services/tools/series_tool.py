from typing import Any, Dict, Optional

from src.services.compute import automaton, sortable
from src.services.compute.series import eulerian, eulerian_column_gf
from src.services.data import formats
from src.services.tools.responses import error, success

KINDS = ("pk", "eulerian", "A", "Dk", "bridge")


async def flipsort_series(kind: str, order: int = 10, k: Optional[int] = None) -> Dict[str, Any]:
    """
    Generating functions of the flip-sort counting problems.

    Args:
        kind: pk (pop-stacked with k runs), eulerian (column k of the Eulerian
            triangle), A (2-pss permutations by ascents), Dk (diagonal k of
            that table) or bridge (coloured walk models)
        order: Number of series terms (for A: the largest size n)
        k: Runs, Eulerian column or diagonal index, where the kind needs one
    """
    try:
        if kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got '{kind}'")
        if kind in ("pk", "eulerian") and (k is None or k < 1):
            raise ValueError(f"{kind} needs a positive k")
        if kind == "pk":
            gf = automaton.pk_gf(k)
            return success(f"P_{k} expanded", kind=kind, k=k, gf=str(gf),
                           gf_text=formats.gf_to_text(gf), series=gf.series(order).integer_coefficients())
        if kind == "eulerian":
            gf = eulerian_column_gf(k)
            return success(f"Eulerian column {k} expanded", kind=kind, k=k, gf=str(gf),
                           gf_text=formats.gf_to_text(gf),
                           series=gf.series(order).integer_coefficients(),
                           column=[eulerian(n, k) for n in range(1, order + 1)])
        if kind == "A":
            return success("A(x, y) expanded", kind=kind, gf=str(sortable.bivariate_gf()),
                           table=formats.frame_records(sortable.twopss_table(order)))
        if kind == "Dk":
            k = 0 if k is None else k
            series = sortable.diagonal_gf(k, order).integer_coefficients()
            payload: Dict[str, Any] = {"kind": kind, "k": k, "series": series}
            if k == 0:
                payload["closed_forms"] = [list(sortable.diagonal_closed_forms(n)) for n in range(1, order + 1)]
            return success(f"diagonal {k} expanded", **payload)
        models = sortable.walk_model_gfs(order=2 * order)
        return success(
            "walk models expanded",
            kind=kind,
            bridges=models.bridges.integer_coefficients(),
            excursions=models.excursions.integer_coefficients(),
            alternate_excursions=models.alternate_excursions.integer_coefficients(),
            consistent=models.consistent(),
        )
    except Exception as err:
        return error(err, "series")
