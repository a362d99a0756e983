from typing import Any, Dict, Optional

from src.services.compute import worstcase
from src.services.compute.permutations import Permutation, bandwidth, iterate
from src.services.data import formats
from src.services.tools.responses import error, success

ACTIONS = ("bandwidth", "im-n2", "witness", "hasse", "skew-report")


async def flipsort_worstcase(
    action: str,
    n: Optional[int] = None,
    perm: Optional[str] = None,
    m: Optional[int] = None,
    i: Optional[int] = None,
    j: Optional[int] = None,
    k: Optional[int] = None,
    nk: Optional[int] = None,
) -> Dict[str, Any]:
    """
    Worst-case machinery: bandwidth bound, the image of T^(n-2), coverage
    witnesses, the shadow poset and the skew-layered cost report.

    Args:
        action: bandwidth (exhaustive bound check over S_n, or the bandwidth
            of perm), im-n2 (membership and pre-image for perm), witness
            (needs n, m, i, j), hasse (needs k, nk) or skew-report (needs n)
        n: Size
        perm: Permutation text
        m: Number of flip passes
        i: Position
        j: Value
        k: Number of letters S
        nk: Number of letters L
    """
    try:
        if action not in ACTIONS:
            raise ValueError(f"action must be one of {ACTIONS}, got '{action}'")
        if action == "bandwidth":
            if perm:
                p = Permutation.parse(perm)
                widths = [bandwidth(iterate(p, step)) for step in range(p.size)]
                return success("bandwidth trajectory computed", input=str(p), bandwidths=widths,
                               bounds=[p.size - 1 - step for step in range(p.size)])
            _require(n=n)
            holds = worstcase.verify_bandwidth_theorem(n)
            return success(f"bandwidth bound {'holds' if holds else 'FAILS'} over S_{n}", n=n, holds=holds)
        if action == "im-n2":
            _require(perm=perm)
            p = Permutation.parse(perm)
            member = worstcase.is_im_n_minus_2(p)
            payload: Dict[str, Any] = {"input": str(p), "member": member, "preimage": None}
            if member:
                payload["preimage"] = str(worstcase.preimage_n_minus_2(p))
            return success("image test done", **payload)
        if action == "witness":
            _require(n=n, m=m, i=i, j=j)
            witness = worstcase.coverage_witness(n, m, i, j)
            return success("witness built", n=n, m=m, i=i, j=j, witness=str(witness),
                           image=str(iterate(witness, m)))
        if action == "hasse":
            _require(k=k, nk=nk)
            diagram = worstcase.hasse(k, nk)
            return success(f"{len(diagram.elements)} words, {len(diagram.edges)} covers",
                           k=k, nk=nk, elements=[str(w) for w in diagram.elements],
                           chain=[str(w) for w in diagram.chain],
                           edges=formats.frame_records(diagram.to_frame()))
        _require(n=n)
        report = worstcase.skew_conjecture_report(n)
        return success("skew-layered report built", **report.summary(),
                       rows=formats.frame_records(report.frame))
    except Exception as err:
        return error(err, "worstcase")


def _require(**arguments) -> None:
    missing = [name for name, value in arguments.items() if value is None]
    if missing:
        raise ValueError(f"missing arguments: {', '.join(missing)}")
