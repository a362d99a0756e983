from typing import List, Optional
from fastmcp import FastMCP
import os, sys
import logging

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__),'..')))

from src.services.config import LOG_FORMAT, LOG_LEVEL, VERIFY_DEFAULT_N
# Import tool implementations
from src.services.tools.permutation_tool import (
    flipsort_cost,
    flipsort_flip,
    flipsort_is_popstacked,
    flipsort_preimages,
    flipsort_trace,
)
from src.services.tools.count_tool import flipsort_count
from src.services.tools.automaton_tool import flipsort_automaton
from src.services.tools.series_tool import flipsort_series
from src.services.tools.twopss_tool import flipsort_twopss
from src.services.tools.worstcase_tool import flipsort_worstcase
from src.services.tools.diagram_tool import flipsort_diagram
from src.services.tools.verify_tool import flipsort_verify

logging.basicConfig(
    level=getattr(logging, LOG_LEVEL),
    format=LOG_FORMAT,
    handlers=[logging.StreamHandler(sys.stderr)]
)
logger = logging.getLogger(__name__)

# Create MCP server instance
mcp = FastMCP("mcp-flipsort-server")

# Register tools with MCP server
@mcp.tool()
async def flipsort_flip_tool(perm: str, steps: int = 1):
    """
    Applies flip-sort passes to a permutation: each pass reverses every maximal
    decreasing block. Permutations are "3276145" or "3 2 7 6 1 4 5".
    """
    return await flipsort_flip(perm, steps)


@mcp.tool()
async def flipsort_cost_tool(perm: str):
    """Number of flip passes needed to sort a permutation (at most n-1)."""
    return await flipsort_cost(perm)


@mcp.tool()
async def flipsort_trace_tool(perm: str):
    """The whole flip-sort trajectory of a permutation, ending at the identity."""
    return await flipsort_trace(perm)


@mcp.tool()
async def flipsort_is_popstacked_tool(perm: str):
    """
    Whether a permutation is the result of one flip pass (adjacent runs overlap),
    with one pre-image when it is.
    """
    return await flipsort_is_popstacked(perm)


@mcp.tool()
async def flipsort_preimages_tool(perm: str):
    """All permutations sent to the given one by a single flip pass."""
    return await flipsort_preimages(perm)


@mcp.tool()
async def flipsort_count_tool(max_n: int = 18, runs: bool = False, fmt: str = "bfile"):
    """
    Counts pop-stacked permutations of each size up to max_n (exact integers),
    optionally split by number of runs. fmt is bfile, csv or json.
    """
    return await flipsort_count(max_n, runs, fmt)


@mcp.tool()
async def flipsort_automaton_tool(action: str, k: int, n_max: Optional[int] = None):
    """
    Builds, minimizes or solves the automaton for pop-stacked permutations with
    k runs. action is build, minimize, gf or report.
    """
    return await flipsort_automaton(action, k, n_max)


@mcp.tool()
async def flipsort_series_tool(kind: str, order: int = 10, k: Optional[int] = None):
    """
    Exact generating functions and their coefficients. kind is pk, eulerian,
    A, Dk or bridge.
    """
    return await flipsort_series(kind, order, k)


@mcp.tool()
async def flipsort_twopss_tool(action: str, value: Optional[str] = None, n_max: int = 8):
    """
    Permutations sorted by two flip passes: encode a permutation as a coloured
    walk, decode a walk, or tabulate them by size and ascents.
    """
    return await flipsort_twopss(action, value, n_max)


@mcp.tool()
async def flipsort_worstcase_tool(
    action: str,
    n: Optional[int] = None,
    perm: Optional[str] = None,
    m: Optional[int] = None,
    i: Optional[int] = None,
    j: Optional[int] = None,
    k: Optional[int] = None,
    nk: Optional[int] = None,
):
    """
    Worst cases of flip-sort. action is bandwidth, im-n2, witness, hasse or
    skew-report.
    """
    return await flipsort_worstcase(action, n=n, perm=perm, m=m, i=i, j=j, k=k, nk=nk)


@mcp.tool()
async def flipsort_diagram_tool(source: str, iterations: Optional[List[int]] = None, seed: Optional[int] = None):
    """
    Dots (i, T^m(p)_i) of permutation diagrams as CSV, for a permutation or a
    seeded random one ("random:1200").
    """
    return await flipsort_diagram(source, iterations, seed)


@mcp.tool()
async def flipsort_verify_tool(n: int = VERIFY_DEFAULT_N):
    """Runs the full invariant suite against brute force over S_n."""
    return await flipsort_verify(n)


def main():
    mcp.run()

if __name__ == "__main__":
    try:
        main()
    except KeyboardInterrupt:
        logger.info("Server shutdown requested")
    except Exception as e:
        logger.error(f"Server error: {str(e)}")
        sys.exit(1)
