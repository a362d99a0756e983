from typing import Any, Dict, Optional

from src.services.compute import sortable
from src.services.compute.permutations import Permutation, cost
from src.services.data import formats
from src.services.tools.responses import error, success

ACTIONS = ("encode", "decode", "table")


async def flipsort_twopss(action: str, value: Optional[str] = None, n_max: int = 8) -> Dict[str, Any]:
    """
    Permutations sorted by at most two flip passes and their coloured walks.

    Args:
        action: encode (permutation -> walk), decode (walk -> permutation) or
            table (a_{n,k} by size and ascents)
        value: Permutation text for encode, walk text such as "D U- U- D" for decode
        n_max: Largest size for table
    """
    try:
        if action not in ACTIONS:
            raise ValueError(f"action must be one of {ACTIONS}, got '{action}'")
        if action == "table":
            return success(f"a(n, k) for n <= {n_max}", n_max=n_max,
                           gf=str(sortable.bivariate_gf()),
                           table=formats.frame_records(sortable.twopss_table(n_max)))
        if not value:
            raise ValueError(f"{action} needs a value")
        if action == "encode":
            p = Permutation.parse(value)
            walk = sortable.encode_2pss(p)
            return success("walk encoded", input=str(p), cost=cost(p), walk=str(walk),
                           altitude=walk.altitude)
        walk = sortable.ColouredWalk.parse(value)
        p = sortable.decode_walk(walk)
        return success("walk decoded", input=str(walk), permutation=str(p), cost=cost(p))
    except Exception as err:
        return error(err, "twopss")
