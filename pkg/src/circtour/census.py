"""Per-order census of circulant tournaments with an on-disk result cache."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import random
import sqlite3
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from math import gcd
from typing import Iterable, Optional, Sequence

from . import __version__
from .composition import circulant_split, factorize, find_module, is_simple
from .disconnection import (
    DEFAULT_BOUNDS,
    SearchBounds,
    Variant,
    disconnection_value,
    keenness_check,
)
from .tournament import SymbolSet, build, enumerate_symbol_sets, multiply
from .verification import omega3_value
from .zmod import is_arithmetic_progression, period, quasi_periodic_witness, sumset

log = logging.getLogger(__name__)

CACHE_VERSION = f"circtour-{__version__}"


class CensusViolation(RuntimeError):
    def __init__(self, row: "CensusRow", reason: str):
        super().__init__(f"{reason}\n{json.dumps(row.to_record(), sort_keys=True)}")
        self.row = row
        self.reason = reason


@dataclass(frozen=True)
class CensusOptions:
    omega: bool = False
    keen: bool = False
    dedup: bool = False
    jobs: int = 1
    cache_path: Optional[str] = None
    use_cache: bool = True
    timings: bool = False
    spot_check: int = 5
    seed: int = 42
    bounds: SearchBounds = DEFAULT_BOUNDS


@dataclass(frozen=True)
class CensusRow:
    order: int
    symbol: str
    is_ap: bool
    is_quasi_periodic: bool
    is_aperiodic: bool
    is_simple: bool
    sumset_size: int
    omega3: int
    omega: Optional[int] = None
    keen_w3: Optional[bool] = None
    keen_w: Optional[bool] = None
    factorization: str = ""
    module_found: bool = False
    period_order: int = 1
    witness_order: int = 0
    orbit_size: int = 1
    timings: Optional[dict] = field(default=None, compare=False)

    def to_record(self) -> dict:
        rec = asdict(self)
        if rec["timings"] is None:
            del rec["timings"]
        return rec


COLUMNS = [f.name for f in fields(CensusRow)]


def _compute_columns(symbol: SymbolSet, wanted: Sequence[str], bounds: SearchBounds) -> dict:
    t = build(symbol)
    j = symbol.residues
    out = {}
    for col in wanted:
        start = time.perf_counter()
        if col == "structure":
            w = quasi_periodic_witness(j)
            out[col] = {
                "is_ap": is_arithmetic_progression(j) is not None,
                "is_quasi_periodic": w is not None,
                "is_aperiodic": circulant_split(symbol) is None,
                "is_simple": is_simple(symbol),
                "sumset_size": len(sumset(j, j)),
                "period_order": period(j).order,
                "witness_order": w.subgroup.order if w else 0,
                "witness_periodic_empty": bool(w and not w.periodic_part),
                "factorization": factorize(symbol).to_sexpr(),
                "module_found": find_module(t) is not None,
            }
        elif col == "omega3":
            out[col] = omega3_value(symbol, bounds)
        elif col == "omega":
            out[col] = disconnection_value(t, Variant.ACYCLIC, bounds)
        elif col == "keen_w3":
            out[col] = keenness_check(t, Variant.TRIANGLE_FREE, bounds)
        elif col == "keen_w":
            out[col] = keenness_check(t, Variant.ACYCLIC, bounds)
        else:
            raise ValueError(f"unknown column {col}")
        out[f"_t_{col}"] = time.perf_counter() - start
    return out


def _job(args):
    text, wanted, bounds = args
    return text, _compute_columns(SymbolSet.parse(text), wanted, bounds)


def _wanted(options: CensusOptions) -> list[str]:
    cols = ["structure", "omega3"]
    if options.omega:
        cols.append("omega")
    if options.keen:
        cols += ["keen_w3", "keen_w"]
    return cols


def _check_bounds(order: int, options: CensusOptions) -> None:
    b = options.bounds
    b.check(order, b.decision_order, "omega3 column")
    if options.omega:
        b.check(order, b.report_order, "omega column")
    if options.keen:
        b.check(order, b.report_order, "keenness columns")


def multiplier_orbits(order: int) -> list[tuple[SymbolSet, int]]:
    """Least symbol set of each orbit under x -> a*x, with the orbit size."""
    units = [a for a in range(1, order) if gcd(a, order) == 1]
    seen: set[SymbolSet] = set()
    reps = []
    for j in enumerate_symbol_sets(order // 2):
        if j in seen:
            continue
        orbit = {multiply(j, a) for a in units}
        seen |= orbit
        reps.append((min(orbit), len(orbit)))
    reps.sort(key=lambda p: p[0])
    return reps


def _assemble(order: int, symbol: SymbolSet, cols: dict, orbit: int, timings: bool) -> CensusRow:
    s = dict(cols["structure"])
    if s.pop("witness_periodic_empty", False):
        log.warning("%s: quasi-periodic only through an empty periodic part", symbol)
    row = CensusRow(
        order=order,
        symbol=symbol.text,
        omega3=cols["omega3"],
        omega=cols.get("omega"),
        keen_w3=cols.get("keen_w3"),
        keen_w=cols.get("keen_w"),
        orbit_size=orbit,
        timings={k[3:]: round(v, 6) for k, v in cols.items() if k.startswith("_t_")}
        if timings
        else None,
        **s,
    )
    check_row(row)
    return row


def check_row(row: CensusRow) -> None:
    n = row.order // 2
    if not row.is_simple == row.is_aperiodic == (row.omega3 == 2):
        raise CensusViolation(row, "simple / aperiodic / tight disagree")
    if row.omega is not None and row.omega != row.omega3:
        raise CensusViolation(row, "omega differs from omega3")
    if not 2 * n - 1 <= row.sumset_size <= 2 * n:
        raise CensusViolation(row, "|J+J| outside [2|J|-1, 2|J|]")
    if row.keen_w3 is False or row.keen_w is False:
        raise CensusViolation(row, "not keen")
    if not row.is_simple and not row.module_found:
        raise CensusViolation(row, "composite tournament without a module")


class ResultCache:
    """Single-file sqlite store; only the census driver writes to it."""

    def __init__(self, path: str):
        self.path = path
        self.conn = sqlite3.connect(path)
        self.conn.execute(
            "CREATE TABLE IF NOT EXISTS results ("
            "ord INTEGER, symbol TEXT, col TEXT, version TEXT, value TEXT, "
            "PRIMARY KEY (ord, symbol, col, version))"
        )

    def get(self, order: int, symbol: str, col: str):
        hit = self.conn.execute(
            "SELECT value FROM results WHERE ord=? AND symbol=? AND col=? AND version=?",
            (order, symbol, col, CACHE_VERSION),
        ).fetchone()
        return None if hit is None else json.loads(hit[0])

    def put(self, order: int, symbol: str, col: str, value) -> None:
        self.conn.execute(
            "INSERT OR REPLACE INTO results VALUES (?, ?, ?, ?, ?)",
            (order, symbol, col, CACHE_VERSION, json.dumps(value, sort_keys=True)),
        )

    def commit(self) -> None:
        self.conn.commit()

    def close(self) -> None:
        self.conn.commit()
        self.conn.close()


def run_census(order: int, options: CensusOptions = CensusOptions()) -> list[CensusRow]:
    if order < 3 or order % 2 == 0:
        raise ValueError(f"order must be odd and >= 3, got {order}")
    _check_bounds(order, options)
    wanted = _wanted(options)
    if options.dedup:
        targets = multiplier_orbits(order)
    else:
        targets = [(j, 1) for j in enumerate_symbol_sets(order // 2)]

    cache = ResultCache(options.cache_path) if options.cache_path and options.use_cache else None
    results: dict[str, dict] = {}
    todo = []
    for j, _ in targets:
        have = {}
        missing = []
        for col in wanted:
            val = cache.get(order, j.text, col) if cache else None
            if val is None:
                missing.append(col)
            else:
                have[col] = val
                have[f"_t_{col}"] = 0.0
        results[j.text] = have
        if missing:
            todo.append((j.text, missing, options.bounds))

    jobs = max(1, options.jobs)
    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_job, todo, chunksize=max(1, len(todo) // (4 * jobs))))
    else:
        done = [_job(item) for item in todo]
    for text, cols in done:
        results[text].update(cols)
        if cache:
            for col in cols:
                if not col.startswith("_t_"):
                    cache.put(order, text, col, cols[col])
    if cache:
        cache.commit()

    rows = [
        _assemble(order, j, dict(results[j.text]), orbit, options.timings) for j, orbit in targets
    ]
    if cache:
        _spot_check(rows, wanted, options)
        cache.close()
    return rows


def _spot_check(rows: list[CensusRow], wanted: list[str], options: CensusOptions) -> None:
    rng = random.Random(options.seed)
    for row in rng.sample(rows, min(options.spot_check, len(rows))):
        symbol = SymbolSet.parse(row.symbol)
        fresh = _assemble(
            row.order,
            symbol,
            _compute_columns(symbol, wanted, options.bounds),
            row.orbit_size,
            False,
        )
        if replace(row, timings=None) != fresh:
            raise CensusViolation(row, "cached row differs from a fresh computation")


def format_rows(rows: Iterable[CensusRow], fmt: str = "csv") -> str:
    rows = list(rows)
    buf = io.StringIO()
    if fmt == "jsonl":
        for row in rows:
            buf.write(json.dumps(row.to_record(), sort_keys=True) + "\n")
        return buf.getvalue()
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    cols = [c for c in COLUMNS if c != "timings"]
    with_timings = any(r.timings is not None for r in rows)
    if with_timings:
        cols.append("timings")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        rec = row.to_record()
        values = []
        for c in cols:
            v = rec.get(c)
            if c == "timings" and v is not None:
                v = json.dumps(v, sort_keys=True)
            values.append("" if v is None else v)
        writer.writerow(values)
    return buf.getvalue()


def default_jobs() -> int:
    return os.cpu_count() or 1
