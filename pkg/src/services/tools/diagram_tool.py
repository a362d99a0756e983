from typing import Any, Dict, List, Optional

from src.services.config import DIAGRAM_DEFAULT_SEED, DIAGRAM_PRNG
from src.services.compute import worstcase
from src.services.compute.permutations import Permutation
from src.services.data import formats
from src.services.tools.responses import error, success

RANDOM_PREFIX = "random:"


def resolve_source(source: str, seed: Optional[int]) -> Permutation:
    """A permutation from its text, or a seeded random one from "random:N"."""
    if source.startswith(RANDOM_PREFIX):
        try:
            n = int(source[len(RANDOM_PREFIX):])
        except ValueError as err:
            raise ValueError(f"bad random size in '{source}'") from err
        if n < 1:
            raise ValueError("random permutations need a positive size")
        return worstcase.random_permutation(n, seed)
    return Permutation.parse(source)


async def flipsort_diagram(
    source: str,
    iterations: Optional[List[int]] = None,
    seed: Optional[int] = None,
) -> Dict[str, Any]:
    """
    Dots of the permutation diagrams of T^m(p) and the allowed band n-1-m.

    Args:
        source: Permutation text or "random:N"
        iterations: Values of m (default [0])
        seed: PRNG seed for random sources (default DIAGRAM_DEFAULT_SEED)
    """
    try:
        is_random = source.startswith(RANDOM_PREFIX)
        if is_random and seed is None:
            seed = DIAGRAM_DEFAULT_SEED
        p = resolve_source(source, seed)
        iterations = [0] if iterations is None else list(iterations)
        frame = worstcase.diagram_series(p, iterations)
        bounds = {m: max(p.size - 1 - m, 0) for m in iterations}
        metadata: Dict[str, Any] = {"n": p.size, "iterations": iterations, "bounds": bounds}
        if is_random:
            metadata.update({"prng": DIAGRAM_PRNG, "seed": seed})
        else:
            metadata["permutation"] = str(p)
        return success(f"{len(frame)} dots emitted", **metadata,
                       csv=formats.dots_to_csv(frame, p.size, seed if is_random else None))
    except Exception as err:
        return error(err, "diagram")
