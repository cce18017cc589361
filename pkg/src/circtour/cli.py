"""Command line front end.

Usage:
    circtour census --order 15 [--omega] [--keen] [--dedup] [--jobs N]
                    [--cache PATH] [--no-cache] [--format csv|jsonl]
    circtour verify SUITE [--orders 7,9,11,13] [--trials N] [--seed S]
    circtour factorize SYMBOLSET
    circtour omega3 SYMBOLSET
    circtour omega SYMBOLSET
    circtour compose J K

Results go to stdout, diagnostics to stderr.  Exit status: 0 when all
requested checks pass, 1 when a verification finds a violation, 2 on usage
or bound errors.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from dataclasses import replace
from typing import Optional, Sequence

from .census import CensusOptions, CensusViolation, default_jobs, format_rows, run_census
from .composition import CompositionError, compose, factorize
from .disconnection import SearchBoundExceeded, SearchBounds, omega, omega3
from .tournament import InvalidSymbolSet, SymbolSet, build
from .verification import SUITES

log = logging.getLogger("circtour")

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2

_CONFIG_KEYS = {
    "report_order": int,
    "decision_order": int,
    "max_listed_partitions": int,
    "allow_slow": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
    "seed": int,
    "jobs": int,
    "trials": int,
}


def load_config(path: Optional[str]) -> dict:
    """Read ``key = value`` lines; an optional section header is ignored."""
    if not path:
        return {}
    with open(path) as fh:
        text = fh.read()
    parser = configparser.ConfigParser()
    if not text.lstrip().startswith("["):
        text = "[circtour]\n" + text
    parser.read_string(text)
    out = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if key not in _CONFIG_KEYS:
                raise ValueError(f"unknown configuration key {key!r}")
            out[key] = _CONFIG_KEYS[key](raw)
    return out


def _bounds(cfg: dict, args) -> SearchBounds:
    b = SearchBounds()
    updates = {k: cfg[k] for k in ("report_order", "decision_order", "max_listed_partitions", "allow_slow") if k in cfg}
    if getattr(args, "allow_slow", False):
        updates["allow_slow"] = True
    return replace(b, **updates)


def _orders(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="circtour", description=__doc__.split("\n")[0])
    p.add_argument("--config", help="key = value file with bounds and defaults")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--allow-slow", action="store_true", help="permit searches above the configured bounds")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("census", help="classify every symbol set of one order")
    c.add_argument("--order", type=int, required=True)
    c.add_argument("--omega", action="store_true", help="also compute the acyclic disconnection")
    c.add_argument("--keen", action="store_true", help="also check keenness for both variants")
    c.add_argument("--dedup", action="store_true", help="one row per multiplier orbit (heuristic)")
    c.add_argument("--jobs", type=int, default=None)
    c.add_argument("--cache", default=None, help="sqlite result cache")
    c.add_argument("--no-cache", action="store_true")
    c.add_argument("--timings", action="store_true", help="include per-column timings")
    c.add_argument("--format", choices=("csv", "jsonl"), default="csv")

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=sorted(SUITES))
    v.add_argument("--orders", type=_orders, default=None)
    v.add_argument("--trials", type=int, default=None)
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--moduli", type=_orders, default=None, help="lemmas suite only")

    for name in ("factorize", "omega3", "omega"):
        sp = sub.add_parser(name)
        sp.add_argument("symbol")
    cp = sub.add_parser("compose")
    cp.add_argument("outer")
    cp.add_argument("inner")
    return p


def _verify(args, cfg: dict, bounds: SearchBounds):
    suite = args.suite
    fn = SUITES[suite]
    seed = args.seed if args.seed is not None else cfg.get("seed", 42)
    trials = args.trials if args.trials is not None else cfg.get("trials")
    kwargs: dict = {}
    if suite in ("char", "final", "keen", "alspach", "search", "modules") and args.orders:
        kwargs["orders"] = args.orders
    elif suite in ("char", "final", "keen"):
        kwargs["orders"] = {"char": [7, 9, 11, 13, 15], "final": [7, 9, 11, 13], "keen": [7, 9, 11, 13]}[suite]
    if suite in ("char", "final", "keen", "additivity"):
        kwargs["bounds"] = bounds
    if suite == "lemmas":
        kwargs["seed"] = seed
        if trials is not None:
            kwargs["trials"] = trials
        if args.moduli:
            kwargs["moduli"] = args.moduli
    if suite == "kneser":
        kwargs["seed"] = seed
        if trials is not None:
            kwargs["samples"] = trials
    return fn(**kwargs)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args.config)
        bounds = _bounds(cfg, args)
        if args.command == "census":
            options = CensusOptions(
                omega=args.omega,
                keen=args.keen,
                dedup=args.dedup,
                jobs=args.jobs or cfg.get("jobs") or default_jobs(),
                cache_path=args.cache,
                use_cache=not args.no_cache,
                timings=args.timings,
                seed=cfg.get("seed", 42),
                bounds=bounds,
            )
            try:
                rows = run_census(args.order, options)
            except CensusViolation as exc:
                print(f"census violation: {exc}", file=sys.stderr)
                return EXIT_VIOLATION
            sys.stdout.write(format_rows(rows, args.format))
            return EXIT_OK
        if args.command == "verify":
            report = _verify(args, cfg, bounds)
            print(report.to_json())
            if not report.passed:
                print(f"{report.suite}: FAIL {report.counterexample}", file=sys.stderr)
                return EXIT_VIOLATION
            return EXIT_OK
        if args.command == "factorize":
            print(factorize(SymbolSet.parse(args.symbol)).to_sexpr())
            return EXIT_OK
        if args.command in ("omega3", "omega"):
            fn = omega3 if args.command == "omega3" else omega
            report = fn(build(SymbolSet.parse(args.symbol)), bounds)
            print(report.to_json())
            return EXIT_OK
        if args.command == "compose":
            print(compose(SymbolSet.parse(args.outer), SymbolSet.parse(args.inner)))
            return EXIT_OK
    except (SearchBoundExceeded, InvalidSymbolSet, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CompositionError as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    parser.error(f"unknown command {args.command}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
