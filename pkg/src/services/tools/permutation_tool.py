from typing import Any, Dict, Optional

from src.services.config import IMAGE_MAX_N
from src.services.compute.permutations import Permutation, cost, iterate, trajectory
from src.services.compute import popstacked
from src.services.data import oracle
from src.services.tools.responses import error, success


async def flipsort_flip(perm: str, steps: int = 1) -> Dict[str, Any]:
    """
    Applies the flip transformation (reverse every maximal fall) one or more times.

    Args:
        perm: Permutation text, e.g. "3276145" or "3 2 7 6 1 4 5"
        steps: Number of passes
    """
    try:
        p = Permutation.parse(perm)
        return success(f"T^{steps} computed", input=str(p), steps=steps, result=str(iterate(p, steps)))
    except Exception as err:
        return error(err, "flip")


async def flipsort_cost(perm: str) -> Dict[str, Any]:
    """Number of flip passes needed to sort a permutation."""
    try:
        p = Permutation.parse(perm)
        return success("cost computed", input=str(p), cost=cost(p))
    except Exception as err:
        return error(err, "cost")


async def flipsort_trace(perm: str) -> Dict[str, Any]:
    """Full trajectory p, T(p), ..., identity."""
    try:
        p = Permutation.parse(perm)
        chain = [str(q) for q in trajectory(p)]
        return success("trajectory computed", input=str(p), cost=len(chain) - 1, trajectory=chain)
    except Exception as err:
        return error(err, "trace")


async def flipsort_is_popstacked(perm: str) -> Dict[str, Any]:
    """Whether a permutation is in the image of one flip pass, with a pre-image when it is."""
    try:
        p = Permutation.parse(perm)
        member = popstacked.is_popstacked(p)
        fields: Dict[str, Optional[str]] = {"input": str(p), "popstacked": member, "preimage": None}
        if member:
            fields["preimage"] = str(popstacked.canonical_preimage(p))
        return success("pop-stacked test done", **fields)
    except Exception as err:
        return error(err, "is-popstacked")


async def flipsort_preimages(perm: str) -> Dict[str, Any]:
    """
    All pre-images under one flip pass.

    Layered pop-stacked permutations use the bar construction; anything else
    falls back to brute force, which needs n <= IMAGE_MAX_N.
    """
    try:
        p = Permutation.parse(perm)
        if popstacked.is_layered(p) and popstacked.is_popstacked(p):
            method = "bars"
            found = popstacked.preimages_layered(p)
        else:
            method = "oracle"
            found = oracle.preimage_set(p)
        return success(f"{len(found)} pre-images via {method}", input=str(p), method=method,
                       count=len(found), preimages=[str(q) for q in found],
                       oracle_limit=IMAGE_MAX_N)
    except Exception as err:
        return error(err, "preimages")
