"""Verification suites run by ``circtour verify`` and the acceptance tests.

Each suite returns a :class:`SuiteReport`; a failing suite carries the first
counterexample found.
"""

from __future__ import annotations

import itertools
import json
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .composition import (
    compose,
    decompose,
    find_module,
    circulant_split,
    is_simple,
    verify_composition,
)
from .disconnection import (
    DEFAULT_BOUNDS,
    SearchBounds,
    Variant,
    brute_force_value,
    disconnection_value,
    enumerate_valid_partitions,
    is_tight,
    keenness,
    lemma_identities,
    random_three_partition,
)
from .tournament import (
    SymbolSet,
    VertexPartition,
    alspach_check,
    build,
    enumerate_symbol_sets,
    is_externally_c3_free,
    singular_count,
)
from .zmod import (
    ResidueSet,
    is_arithmetic_progression,
    kneser_check,
    quasi_periodic_witness,
    sumset,
)


@dataclass
class SuiteReport:
    suite: str
    passed: bool = True
    checked: int = 0
    counterexample: Optional[str] = None
    stats: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def fail(self, message: str) -> None:
        if self.passed:
            self.counterexample = message
        self.passed = False
        self.stats["violations"] = self.stats.get("violations", 0) + 1

    def to_json(self) -> str:
        rec = {
            "suite": self.suite,
            "passed": self.passed,
            "checked": self.checked,
            "counterexample": self.counterexample,
            "stats": self.stats,
            "elapsed": round(self.elapsed, 3),
        }
        return json.dumps(rec, sort_keys=True)


def _symbols(order: int) -> Iterable[SymbolSet]:
    if order < 3 or order % 2 == 0:
        raise ValueError(f"order must be odd and >= 3, got {order}")
    return enumerate_symbol_sets(order // 2)


def _timed(fn: Callable[..., SuiteReport]) -> Callable[..., SuiteReport]:
    def wrapper(*args, **kwargs) -> SuiteReport:
        start = time.perf_counter()
        report = fn(*args, **kwargs)
        report.elapsed = time.perf_counter() - start
        return report

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def omega3_value(symbol: SymbolSet, bounds: SearchBounds = DEFAULT_BOUNDS) -> int:
    """Decision search first; the full maximisation only for non-tight inputs."""
    t = build(symbol)
    if is_tight(t, bounds):
        return 2
    value_bounds = SearchBounds(
        report_order=max(bounds.report_order, bounds.decision_order),
        decision_order=bounds.decision_order,
        allow_slow=bounds.allow_slow,
    )
    return disconnection_value(t, Variant.TRIANGLE_FREE, value_bounds)


@_timed
def suite_char(orders: Sequence[int], bounds: SearchBounds = DEFAULT_BOUNDS) -> SuiteReport:
    """tight <=> simple <=> aperiodic.

    Simple is the witness scan; aperiodic is the divisor-split search, which
    shares no code with it.
    """
    rep = SuiteReport("char")
    composite = 0
    for order in orders:
        for j in _symbols(order):
            rep.checked += 1
            tight = is_tight(build(j), bounds)
            simple = is_simple(j)
            aperiodic = circulant_split(j) is None
            composite += not simple
            if not tight == simple == aperiodic:
                rep.fail(f"{j}: tight={tight} simple={simple} aperiodic={aperiodic}")
    rep.stats["composite"] = composite
    return rep


@_timed
def suite_final(orders: Sequence[int], bounds: SearchBounds = DEFAULT_BOUNDS) -> SuiteReport:
    """omega = omega3, with 2 <= omega <= omega3."""
    rep = SuiteReport("final")
    values: dict[str, int] = {}
    for order in orders:
        for j in _symbols(order):
            rep.checked += 1
            t = build(j)
            w3 = disconnection_value(t, Variant.TRIANGLE_FREE, bounds)
            w = disconnection_value(t, Variant.ACYCLIC, bounds)
            values[f"{w3}"] = values.get(f"{w3}", 0) + 1
            if not (2 <= w <= w3 and w == w3):
                rep.fail(f"{j}: omega={w} omega3={w3}")
    rep.stats["value_counts"] = values
    return rep


@_timed
def suite_keen(
    orders: Sequence[int],
    full_prop_orders: Sequence[int] = (7, 9),
    bounds: SearchBounds = DEFAULT_BOUNDS,
) -> SuiteReport:
    """Both keenness properties, plus singular_count <= 1 over every
    externally C3-free partition at ``full_prop_orders``."""
    rep = SuiteReport("keen")
    strong = 0
    for order in orders:
        for j in _symbols(order):
            t = build(j)
            for variant in Variant:
                rep.checked += 1
                k = keenness(t, variant, bounds)
                strong += k.all_optimal_have_one_singleton
                if not k.keen:
                    rep.fail(f"{j} {variant.value}: {k}")
                if k.value >= 3 and not k.all_optimal_have_one_singleton:
                    rep.fail(f"{j} {variant.value}: optimal partition without one singleton")
    prop_checked = 0
    for order in full_prop_orders:
        for j in _symbols(order):
            t = build(j)
            for pi in enumerate_valid_partitions(t, Variant.TRIANGLE_FREE, bounds):
                prop_checked += 1
                if singular_count(pi) > 1:
                    rep.fail(f"{j}: {pi} is C3-free with {singular_count(pi)} singletons")
    rep.stats["strong_form_holds"] = strong
    rep.stats["c3_free_partitions_checked"] = prop_checked
    return rep


def _pairs(shapes: Sequence[tuple[int, int]]) -> Iterable[tuple[SymbolSet, SymbolSet]]:
    for a, b in shapes:
        for j in _symbols(a):
            for k in _symbols(b):
                yield j, k


@_timed
def suite_compose_roundtrip(
    shapes: Sequence[tuple[int, int]] = ((3, 3), (3, 5), (5, 3), (3, 7), (7, 3)),
) -> SuiteReport:
    rep = SuiteReport("compose_roundtrip")
    for j, k in _pairs(shapes):
        rep.checked += 1
        product = compose(j, k)
        split = decompose(product)
        if split is None:
            rep.fail(f"compose({j}, {k}) = {product} does not decompose")
            continue
        outer, inner, _ = split
        if compose(outer, inner) != product:
            rep.fail(f"{product} -> ({outer}, {inner}) does not recompose")
        if not verify_composition(outer, inner, product):
            rep.fail(f"{product}: arc sets differ from C({outer})[C({inner})]")
        if not verify_composition(j, k, product):
            rep.fail(f"{product}: arc sets differ from C({j})[C({k})]")
    return rep


@_timed
def suite_additivity(
    shapes: Sequence[tuple[int, int]] = ((3, 3), (3, 5)),
    acyclic_shapes: Sequence[tuple[int, int]] = ((3, 3),),
    bounds: SearchBounds = DEFAULT_BOUNDS,
) -> SuiteReport:
    """omega3(J[K]) = omega3(J) + omega3(K) - 1, same for omega."""
    rep = SuiteReport("additivity")
    big = max(a * b for a, b in list(shapes) + list(acyclic_shapes))
    wide = SearchBounds(
        report_order=max(bounds.report_order, big),
        decision_order=bounds.decision_order,
        allow_slow=bounds.allow_slow,
    )
    for shapes_, variant in ((shapes, Variant.TRIANGLE_FREE), (acyclic_shapes, Variant.ACYCLIC)):
        for j, k in _pairs(shapes_):
            rep.checked += 1
            lhs = disconnection_value(build(compose(j, k)), variant, wide)
            rhs = (
                disconnection_value(build(j), variant, wide)
                + disconnection_value(build(k), variant, wide)
                - 1
            )
            if lhs != rhs:
                rep.fail(f"{variant.value}: {j}[{k}] has {lhs}, expected {rhs}")
    return rep


@_timed
def suite_lemmas(
    moduli: Sequence[int] = (9, 11, 13), trials: int = 10000, seed: int = 42
) -> SuiteReport:
    """Random ordered 3-partitions A|B|C, cycling over every symbol set.

    Counts violations of the three claims separately: the rewriting identity,
    the equivalence of the emptiness and containment forms, and the emptiness
    form on C3-free partitions.
    """
    rep = SuiteReport("lemmas")
    rng = random.Random(seed)
    per = [trials // len(moduli) + (i < trials % len(moduli)) for i in range(len(moduli))]
    stats = {"rewriting": 0, "emptiness_iff_containment": 0, "emptiness_on_c3_free": 0, "c3_free_trials": 0}
    for m, count in zip(moduli, per):
        symbols = list(_symbols(m))
        for i in range(count):
            j = symbols[i % len(symbols)]
            a, b, c = random_three_partition(m, rng)
            rep.checked += 1
            chk = lemma_identities(j.residues, a, b, c)
            pi = VertexPartition([list(a), list(b), list(c)])
            free = is_externally_c3_free(build(j), pi)
            stats["c3_free_trials"] += free
            where = f"J={j} A={a} B={b} C={c}"
            if not chk.rewriting:
                stats["rewriting"] += 1
                rep.fail(f"rewriting identity fails: {where}")
            if not chk.equivalence:
                stats["emptiness_iff_containment"] += 1
                rep.fail(f"emptiness/containment forms disagree: {where}")
            if free and not chk.emptiness:
                stats["emptiness_on_c3_free"] += 1
                rep.fail(f"emptiness form fails on a C3-free partition: {where}")
    rep.stats.update(stats)
    return rep


def _subsets(m: int, min_size: int = 1) -> list[ResidueSet]:
    return [ResidueSet(m, b) for b in range(1, 1 << m) if bin(b).count("1") >= min_size]


def _check_kemperman(rep: SuiteReport, a: ResidueSet, b: ResidueSet) -> bool:
    s = sumset(a, b)
    if len(s) != len(a) + len(b) - 1:
        return False
    if is_arithmetic_progression(s) is None and quasi_periodic_witness(s) is None:
        rep.fail(f"critical pair {a} + {b} = {s} is neither AP nor quasi-periodic")
    return True


@_timed
def suite_kneser(
    max_symbol_order: int = 25,
    exhaustive_max_modulus: int = 9,
    sampled_moduli: Sequence[int] = (11, 12, 13),
    samples: int = 20000,
    seed: int = 42,
) -> SuiteReport:
    rep = SuiteReport("kneser")
    doubling = 0
    doubling_failures: dict[int, int] = {}
    for order in range(3, max_symbol_order + 1, 2):
        for j in _symbols(order):
            rep.checked += 1
            size = len(sumset(j.residues, j.residues))
            n = j.half_size
            if not 2 * n - 1 <= size <= 2 * n:
                rep.fail(f"{j}: |J+J| = {size} outside [{2 * n - 1}, {2 * n}]")
            if is_arithmetic_progression(j.residues) is None:
                doubling += 1
                qp = quasi_periodic_witness(j.residues) is not None
                if (size == 2 * n - 1) != qp:
                    doubling_failures[order] = doubling_failures.get(order, 0) + 1
                    rep.fail(f"{j}: |J+J| = {size} but quasi-periodic = {qp}")
    critical = 0
    kneser_pairs = 0
    for m in range(2, exhaustive_max_modulus + 1):
        subs = _subsets(m)
        for a in subs:
            for b in subs:
                if b.bits < a.bits:
                    continue
                kneser_pairs += 1
                k = kneser_check(a, b)
                if not (k.bound_holds and k.periodicity_clause_holds):
                    rep.fail(f"Kneser fails for {a} + {b}: {k}")
                if len(a) >= 2 and len(b) >= 2:
                    critical += _check_kemperman(rep, a, b)
    rng = random.Random(seed)
    for m in sampled_moduli:
        for _ in range(samples):
            a = ResidueSet.of(m, rng.sample(range(m), rng.randint(2, m // 2)))
            b = ResidueSet.of(m, rng.sample(range(m), rng.randint(2, m // 2)))
            kneser_pairs += 1
            k = kneser_check(a, b)
            if not (k.bound_holds and k.periodicity_clause_holds):
                rep.fail(f"Kneser fails for {a} + {b}: {k}")
            critical += _check_kemperman(rep, a, b)
    rep.checked += kneser_pairs
    rep.stats.update(
        {
            "non_ap_symbol_sets": doubling,
            "doubling_failures_by_order": doubling_failures,
            "critical_pairs": critical,
            "kneser_pairs": kneser_pairs,
        }
    )
    return rep


@_timed
def suite_alspach(orders: Sequence[int] = (3, 5, 7, 9, 11, 13, 15)) -> SuiteReport:
    rep = SuiteReport("alspach")
    for order in orders:
        for j in _symbols(order):
            rep.checked += 1
            if not alspach_check(build(j)):
                rep.fail(f"{j}: some arc lies in no directed triangle")
    return rep


@_timed
def suite_search(orders: Sequence[int] = (7, 9)) -> SuiteReport:
    """Pruned search against plain enumeration of every set partition."""
    rep = SuiteReport("search")
    for order in orders:
        for j in _symbols(order):
            t = build(j)
            for variant in Variant:
                rep.checked += 1
                fast = disconnection_value(t, variant)
                slow = brute_force_value(t, variant)
                if fast != slow:
                    rep.fail(f"{j} {variant.value}: pruned {fast}, brute force {slow}")
    return rep


@_timed
def suite_modules(orders: Sequence[int] = (9, 15)) -> SuiteReport:
    """Record (simple, module exists) pairs; only composite => module is asserted."""
    rep = SuiteReport("modules")
    disagreements = 0
    for order in orders:
        for j in _symbols(order):
            rep.checked += 1
            simple = is_simple(j)
            module = find_module(build(j)) is not None
            disagreements += simple == module
            if not simple and not module:
                rep.fail(f"{j} is composite but no module was found")
    rep.stats["simple_vs_module_disagreements"] = disagreements
    return rep


SUITES: dict[str, Callable[..., SuiteReport]] = {
    "char": suite_char,
    "final": suite_final,
    "keen": suite_keen,
    "compose_roundtrip": suite_compose_roundtrip,
    "additivity": suite_additivity,
    "lemmas": suite_lemmas,
    "kneser": suite_kneser,
    "alspach": suite_alspach,
    "search": suite_search,
    "modules": suite_modules,
}
