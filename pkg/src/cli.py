"""
flipsort: command-line front end for the flip-sort toolkit.

Every subcommand calls the same async tool function the MCP server exposes
and prints its payload: plain text where there is a natural one-line answer,
JSON otherwise (or always, with --json). Exit codes: 0 success, 1 failed
verification, 2 usage or input error.
"""

from typing import Any, Callable, Dict, List, Optional
import argparse
import asyncio
import logging
import os
import sys

import pandas as pd

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.services.config import LOG_FORMAT, LOG_LEVEL, VERIFY_DEFAULT_N
from src.services.data import formats
from src.services.tools.automaton_tool import flipsort_automaton
from src.services.tools.count_tool import flipsort_count
from src.services.tools.diagram_tool import flipsort_diagram
from src.services.tools.permutation_tool import (
    flipsort_cost,
    flipsort_flip,
    flipsort_is_popstacked,
    flipsort_preimages,
    flipsort_trace,
)
from src.services.tools.series_tool import flipsort_series
from src.services.tools.twopss_tool import flipsort_twopss
from src.services.tools.verify_tool import flipsort_verify
from src.services.tools.worstcase_tool import flipsort_worstcase

logger = logging.getLogger("flipsort")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)
    logger.info(f"wrote {path}")


def _dump(payload: Dict[str, Any]) -> str:
    return formats.to_json({k: v for k, v in payload.items() if k not in ("status", "message")})


# Each handler returns the tool payload and its plain-text rendering.

def _flip(args):
    payload = asyncio.run(flipsort_flip(args.perm, args.steps))
    return payload, payload.get("result")


def _cost(args):
    payload = asyncio.run(flipsort_cost(args.perm))
    return payload, str(payload.get("cost"))


def _trace(args):
    payload = asyncio.run(flipsort_trace(args.perm))
    return payload, "\n".join(payload.get("trajectory", []))


def _is_popstacked(args):
    payload = asyncio.run(flipsort_is_popstacked(args.perm))
    text = "yes" if payload.get("popstacked") else "no"
    if payload.get("preimage"):
        text += f" (pre-image {payload['preimage']})"
    return payload, text


def _preimages(args):
    payload = asyncio.run(flipsort_preimages(args.perm))
    return payload, "\n".join(payload.get("preimages", []))


def _count(args):
    fmt = args.format or ("csv" if args.runs else "bfile")
    payload = asyncio.run(flipsort_count(args.max, args.runs, fmt))
    if payload.get("status") != "success":
        return payload, None
    if args.format is None and not args.runs:
        return payload, " ".join(str(v) for v in payload["values"])
    return payload, payload["text"].rstrip("\n")


def _automaton(args):
    payload = asyncio.run(flipsort_automaton(args.action, args.runs, args.max_length))
    if args.export and payload.get("status") == "success":
        _write(args.export, payload.get("export") or payload.get("gf_text") or _dump(payload))
    return payload, None


def _series(args):
    payload = asyncio.run(flipsort_series(args.kind, args.order, args.k))
    if payload.get("status") == "success" and "series" in payload:
        return payload, " ".join(str(v) for v in payload["series"])
    return payload, None


def _twopss(args):
    payload = asyncio.run(flipsort_twopss(args.action, args.value, args.max))
    if args.action == "encode":
        return payload, payload.get("walk")
    if args.action == "decode":
        return payload, payload.get("permutation")
    return payload, None


def _worstcase(args):
    payload = asyncio.run(flipsort_worstcase(
        args.action, n=args.n, perm=args.perm, m=args.m, i=args.i, j=args.j, k=args.k, nk=args.nk))
    if args.out and payload.get("status") == "success":
        rows = payload.get("rows") or payload.get("edges") or []
        _write(args.out, formats.frame_to_csv(pd.DataFrame(rows)))
    if args.action == "witness":
        return payload, payload.get("witness")
    return payload, None


def _diagram(args):
    payload = asyncio.run(flipsort_diagram(args.source, args.iter, args.seed))
    if payload.get("status") != "success":
        return payload, None
    if args.out:
        _write(args.out, payload["csv"])
        bounds = ", ".join(f"m={m}: {b}" for m, b in payload["bounds"].items())
        return payload, f"{payload['message']}; bands {bounds}"
    return payload, payload["csv"].rstrip("\n")


def _verify(args):
    payload = asyncio.run(flipsort_verify(args.n))
    return payload, None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flipsort", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--json", action="store_true", help="print the full JSON payload")
    parser.add_argument("--log-level", default=LOG_LEVEL,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("flip", help="apply T one or more times")
    p.add_argument("perm")
    p.add_argument("--steps", type=int, default=1)
    p.set_defaults(handler=_flip)

    for name, handler, text in (("cost", _cost, "passes needed to sort"),
                                ("trace", _trace, "full trajectory"),
                                ("is-popstacked", _is_popstacked, "membership in Im(T)"),
                                ("preimages", _preimages, "all pre-images under T")):
        p = sub.add_parser(name, help=text)
        p.add_argument("perm")
        p.set_defaults(handler=handler)

    p = sub.add_parser("count", help="count pop-stacked permutations")
    p.add_argument("what", choices=["p"])
    p.add_argument("--max", type=int, default=18)
    p.add_argument("--runs", action="store_true", help="split by number of runs")
    p.add_argument("--format", choices=["bfile", "csv", "json"])
    p.set_defaults(handler=_count)

    p = sub.add_parser("automaton", help="run-word automata")
    p.add_argument("action", choices=["build", "minimize", "gf", "report"])
    p.add_argument("--runs", type=int, required=True, help="number of runs k")
    p.add_argument("--max-length", type=int, help="longest word length to count")
    p.add_argument("--export", help="write the automaton (or generating function) to this path")
    p.set_defaults(handler=_automaton)

    p = sub.add_parser("series", help="generating functions")
    p.add_argument("kind", choices=["pk", "eulerian", "A", "Dk", "bridge"])
    p.add_argument("--order", type=int, default=10)
    p.add_argument("--k", type=int)
    p.set_defaults(handler=_series)

    p = sub.add_parser("twopss", help="permutations sorted by two passes")
    p.add_argument("action", choices=["encode", "decode", "table"])
    p.add_argument("value", nargs="?", help="permutation (encode) or walk such as 'D U- U- D' (decode)")
    p.add_argument("--max", type=int, default=8)
    p.set_defaults(handler=_twopss)

    p = sub.add_parser("worstcase", help="worst-case machinery")
    p.add_argument("action", choices=["bandwidth", "im-n2", "witness", "hasse", "skew-report"])
    p.add_argument("--n", type=int)
    p.add_argument("--perm")
    p.add_argument("--m", type=int)
    p.add_argument("--i", type=int)
    p.add_argument("--j", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--nk", type=int)
    p.add_argument("--out", help="write the report rows or Hasse edges as CSV")
    p.set_defaults(handler=_worstcase)

    p = sub.add_parser("diagram", help="permutation-diagram dots of T^m(p)")
    p.add_argument("source", help="permutation or random:N")
    p.add_argument("--iter", type=int, action="append", help="value of m (repeatable, default 0)")
    p.add_argument("--out", help="write dots as CSV m,i,value")
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=_diagram)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("what", choices=["all"])
    p.add_argument("--n", type=int, default=VERIFY_DEFAULT_N)
    p.set_defaults(handler=_verify)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format=LOG_FORMAT,
        handlers=[logging.StreamHandler(sys.stderr)]
    )
    handler: Callable = args.handler
    try:
        payload, text = handler(args)
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    if payload.get("status") != "success":
        print(f"error ({payload.get('error_type')}): {payload.get('message')}", file=sys.stderr)
        return EXIT_USAGE if payload.get("input_error", True) else EXIT_FAILED
    print(_dump(payload) if args.json or text is None else text)
    if args.command == "verify" and not payload.get("passed"):
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
