from typing import Any, Dict

from src.services.compute.enumeration import addition_cost, count_popstacked
from src.services.data import formats
from src.services.tools.responses import error, success


FORMATS = ("bfile", "csv", "json")


async def flipsort_count(max_n: int = 18, runs: bool = False, fmt: str = "bfile") -> Dict[str, Any]:
    """
    Counts pop-stacked permutations p_1..p_N with the numpy recurrence.

    Args:
        max_n: Largest size N
        runs: Also return the p_{n,k} triangle by number of runs
        fmt: Rendering of the "text" field: bfile, csv (triangle) or json
    """
    try:
        if fmt not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got '{fmt}'")
        if fmt == "csv" and not runs:
            raise ValueError("csv output is the run triangle; pass runs=True")
        table = count_popstacked(max_n, with_runs=runs)
        values = table.sequence()
        payload: Dict[str, Any] = {"max_n": max_n, "values": values,
                                   "additions": table.additions}
        if runs:
            payload["triangle"] = [[n, k, c] for (n, k), c in sorted(table.runs.items())]
        if fmt == "bfile":
            payload["text"] = formats.to_bfile(values)
        elif fmt == "csv":
            payload["text"] = formats.triangle_to_csv(table.triangle())
        else:
            payload["text"] = formats.sequence_to_json(values)
        return success(f"p_1..p_{max_n} computed", **payload)
    except Exception as err:
        return error(err, "count")


async def flipsort_addition_cost(max_n: int) -> Dict[str, Any]:
    """Additions the recurrence performs up to N, next to the N^4/8 main term."""
    try:
        additions = addition_cost(max_n)
        return success("addition count computed", max_n=max_n, additions=additions,
                       main_term=max_n ** 4 / 8, ratio=additions / (max_n ** 4 / 8))
    except Exception as err:
        return error(err, "count-additions")
