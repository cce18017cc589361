"""Exact acyclic and triangle-free disconnection by pruned partition search.

Vertices are assigned to classes in index order.  A vertex may join any class
already opened or open the next one, so every set partition is visited exactly
once (restricted growth strings).  Vertex 0 always lands in class 0.

Both external predicates are monotone: once the assigned prefix contains a
rainbow triangle (or an external cycle) no extension can remove it, and only
structures through the newly placed vertex need checking.  Merging two classes
of a valid partition keeps it valid, so a valid k-partition exists for every
k up to the optimum.
"""

from __future__ import annotations

import enum
import itertools
import json
import random
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

from .tournament import (
    CirculantTournament,
    SymbolSet,
    VertexPartition,
    is_externally_acyclic,
    is_externally_c3_free,
    singular_count,
)
from .zmod import ResidueSet, _iter_bits, complement, difference, sumset


class Variant(str, enum.Enum):
    ACYCLIC = "acyclic"
    TRIANGLE_FREE = "triangle_free"


class SearchBoundExceeded(ValueError):
    """The tournament is larger than the configured search bound."""


@dataclass(frozen=True)
class SearchBounds:
    report_order: int = 13
    decision_order: int = 21
    max_listed_partitions: int = 20000
    allow_slow: bool = False

    def check(self, order: int, limit: int, what: str) -> None:
        if order > limit and not self.allow_slow:
            raise SearchBoundExceeded(
                f"{what} refused at order {order} (bound {limit}); "
                "raise the bound and set allow_slow to proceed"
            )


DEFAULT_BOUNDS = SearchBounds()


@dataclass(frozen=True)
class DisconnectionReport:
    variant: Variant
    value: int
    optimal_partitions: tuple[VertexPartition, ...]
    partition_count: int
    truncated: bool
    singular_histogram: dict[int, int]
    nodes: int
    elapsed: float

    def to_record(self) -> dict:
        return {
            "variant": self.variant.value,
            "value": self.value,
            "partition_count": self.partition_count,
            "truncated": self.truncated,
            "singular_histogram": {str(k): v for k, v in sorted(self.singular_histogram.items())},
            "elapsed": round(self.elapsed, 6),
            "nodes": self.nodes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)


class _Search:
    """Mutable state for one search; not shared between threads."""

    def __init__(self, t: CirculantTournament, variant: Variant):
        self.n = t.order
        self.out = t.out_masks
        self.inn = t.in_masks
        self.variant = variant
        self.labels = [0] * self.n
        self.cls: list[int] = []
        self.nodes = 0
        self.conflicts = (
            self._rainbow if variant is Variant.TRIANGLE_FREE else self._external_cycle
        )

    def _rainbow(self, v: int, c: int, assigned: int) -> bool:
        others = assigned & ~self.cls[c]
        out_u = self.out
        in_v = self.inn[v]
        labels = self.labels
        cls = self.cls
        for u in _iter_bits(self.out[v] & others):
            if out_u[u] & in_v & others & ~cls[labels[u]]:
                return True
        return False

    def _external_cycle(self, v: int, c: int, assigned: int) -> bool:
        target = self.inn[v] & assigned & ~self.cls[c]
        if not target:
            return False
        frontier = self.out[v] & assigned & ~self.cls[c]
        reached = frontier
        labels = self.labels
        cls = self.cls
        out = self.out
        while frontier:
            if reached & target:
                return True
            nxt = 0
            for u in _iter_bits(frontier):
                nxt |= out[u] & assigned & ~cls[labels[u]]
            frontier = nxt & ~reached
            reached |= frontier
        return bool(reached & target)

    def walk(self, exact: Optional[int], cap: Optional[int]) -> Iterator[int]:
        """Yield once per valid complete assignment.

        ``exact`` restricts to partitions with exactly that many classes;
        ``cap`` bounds the number of classes opened.  The caller reads
        ``labels``/``cls`` during each yield.
        """
        n = self.n
        limit = exact if exact is not None else cap
        self.cls = [1]
        self.labels[0] = 0
        self.nodes += 1
        if n == 1:
            if exact in (None, 1):
                yield 1
            return

        def rec(v: int, assigned: int) -> Iterator[int]:
            used = len(self.cls)
            if v == n:
                if exact is None or used == exact:
                    yield used
                return
            remaining = n - v
            if exact is not None and used + remaining < exact:
                return
            top = used + 1 if limit is None else min(used + 1, limit)
            for c in range(top):
                self.nodes += 1
                if c == used:
                    self.cls.append(0)
                if not self.conflicts(v, c, assigned):
                    self.labels[v] = c
                    self.cls[c] |= 1 << v
                    yield from rec(v + 1, assigned | (1 << v))
                    self.cls[c] &= ~(1 << v)
                if c == used:
                    self.cls.pop()

        yield from rec(1, 1)

    def exists(self, k: int) -> bool:
        for _ in self.walk(exact=k, cap=None):
            return True
        return False

    def maximum(self) -> int:
        """Branch and bound on the class count."""
        n = self.n
        best = 1
        self.cls = [1]
        self.labels[0] = 0
        self.nodes += 1

        def rec(v: int, assigned: int) -> None:
            nonlocal best
            used = len(self.cls)
            if v == n:
                best = max(best, used)
                return
            if used + (n - v) <= best:
                return
            # opening a new class first reaches large counts early
            for c in range(used, -1, -1):
                self.nodes += 1
                if c == used:
                    self.cls.append(0)
                if not self.conflicts(v, c, assigned):
                    self.labels[v] = c
                    self.cls[c] |= 1 << v
                    rec(v + 1, assigned | (1 << v))
                    self.cls[c] &= ~(1 << v)
                if c == used:
                    self.cls.pop()
                if used + (n - v) <= best:
                    return

        rec(1, 1)
        return best

    def partition(self) -> VertexPartition:
        return VertexPartition([list(_iter_bits(m)) for m in self.cls])


def _report(
    t: CirculantTournament, variant: Variant, bounds: SearchBounds
) -> DisconnectionReport:
    bounds.check(t.order, bounds.report_order, f"{variant.value} report")
    start = time.perf_counter()
    search = _Search(t, variant)
    value = search.maximum()
    listed: list[VertexPartition] = []
    hist: Counter[int] = Counter()
    count = 0
    for _ in search.walk(exact=value, cap=None):
        count += 1
        singles = sum(1 for m in search.cls if m & (m - 1) == 0)
        hist[singles] += 1
        if len(listed) < bounds.max_listed_partitions:
            listed.append(search.partition())
    return DisconnectionReport(
        variant=variant,
        value=value,
        optimal_partitions=tuple(listed),
        partition_count=count,
        truncated=count > len(listed),
        singular_histogram=dict(hist),
        nodes=search.nodes,
        elapsed=time.perf_counter() - start,
    )


def omega3(t: CirculantTournament, bounds: SearchBounds = DEFAULT_BOUNDS) -> DisconnectionReport:
    """Most classes in a partition with no rainbow directed triangle."""
    return _report(t, Variant.TRIANGLE_FREE, bounds)


def omega(t: CirculantTournament, bounds: SearchBounds = DEFAULT_BOUNDS) -> DisconnectionReport:
    """Most classes in a partition whose external arcs are acyclic."""
    return _report(t, Variant.ACYCLIC, bounds)


def disconnection_value(
    t: CirculantTournament, variant: Variant, bounds: SearchBounds = DEFAULT_BOUNDS
) -> int:
    bounds.check(t.order, bounds.report_order, f"{variant.value} value")
    return _Search(t, variant).maximum()


def is_tight(t: CirculantTournament, bounds: SearchBounds = DEFAULT_BOUNDS) -> bool:
    """True iff no 3-class partition avoids rainbow triangles."""
    bounds.check(t.order, bounds.decision_order, "tightness decision")
    if t.order < 3:
        return True
    return not _Search(t, Variant.TRIANGLE_FREE).exists(3)


def find_partition(
    t: CirculantTournament, variant: Variant, k: int
) -> Optional[VertexPartition]:
    search = _Search(t, variant)
    for _ in search.walk(exact=k, cap=None):
        return search.partition()
    return None


def enumerate_optimal_partitions(
    t: CirculantTournament, variant: Variant, bounds: SearchBounds = DEFAULT_BOUNDS
) -> Iterator[VertexPartition]:
    bounds.check(t.order, bounds.report_order, "optimal partition enumeration")
    search = _Search(t, variant)
    value = search.maximum()
    for _ in search.walk(exact=value, cap=None):
        yield search.partition()


def enumerate_valid_partitions(
    t: CirculantTournament, variant: Variant, bounds: SearchBounds = DEFAULT_BOUNDS
) -> Iterator[VertexPartition]:
    """Every partition (any class count) passing the variant's predicate."""
    bounds.check(t.order, bounds.report_order, "valid partition enumeration")
    search = _Search(t, variant)
    for _ in search.walk(exact=None, cap=None):
        yield search.partition()


@dataclass(frozen=True)
class KeennessResult:
    keen: bool
    value: int
    has_optimal_with_one_singleton: bool
    max_singletons_any_valid: int
    all_optimal_have_one_singleton: bool
    singular_histogram: dict[int, int] = field(default_factory=dict)


def max_singletons(t: CirculantTournament, variant: Variant) -> int:
    """Largest number of singleton classes over all valid partitions.

    A valid partition with singleton classes S stays valid after merging every
    non-singleton class together, so it suffices to test partitions of the
    form {s1}|...|{sk}|rest.  With a transitive rotation group, s1 = 0.
    """
    n = t.order
    pred = is_externally_c3_free if variant is Variant.TRIANGLE_FREE else is_externally_acyclic
    best = 1 if n >= 2 and pred(t, VertexPartition([[0], range(1, n)])) else 0
    if best == 0:
        return 0
    frontier = [(0,)]
    k = 1
    while frontier and k < n - 1:
        grown = []
        for singles in frontier:
            for s in range(singles[-1] + 1, n):
                cand = singles + (s,)
                rest = [v for v in range(n) if v not in cand]
                pi = VertexPartition([[x] for x in cand] + [rest])
                if pred(t, pi):
                    grown.append(cand)
                    best = max(best, singular_count(pi))
        if not grown:
            break
        k += 1
        frontier = grown
    return best


def keenness(
    t: CirculantTournament, variant: Variant, bounds: SearchBounds = DEFAULT_BOUNDS
) -> KeennessResult:
    """Keenness: some optimal partition has exactly one singleton class and
    no valid partition has more than one.

    ``all_optimal_have_one_singleton`` records the stronger every-optimal
    form, which cannot hold once the optimum is 2 and n >= 5 (any split into
    two big classes is optimal then).
    """
    report = _report(t, variant, bounds)
    hist = report.singular_histogram
    most = max_singletons(t, variant)
    has_one = hist.get(1, 0) > 0
    return KeennessResult(
        keen=has_one and most <= 1,
        value=report.value,
        has_optimal_with_one_singleton=has_one,
        max_singletons_any_valid=most,
        all_optimal_have_one_singleton=set(hist) == {1},
        singular_histogram=hist,
    )


def keenness_check(
    t: CirculantTournament, variant: Variant, bounds: SearchBounds = DEFAULT_BOUNDS
) -> bool:
    return keenness(t, variant, bounds).keen


# Zero-pruning oracle.


def set_partitions(n: int) -> Iterator[list[int]]:
    """All restricted growth strings of length n."""
    if n == 0:
        yield []
        return
    labels = [0] * n

    def rec(i: int, used: int) -> Iterator[list[int]]:
        if i == n:
            yield labels
            return
        for c in range(used + 1):
            labels[i] = c
            yield from rec(i + 1, max(used, c + 1))

    yield from rec(1, 1)


def brute_force_value(t: CirculantTournament, variant: Variant) -> int:
    """Check every set partition against the plain predicate; no pruning."""
    n = t.order
    arcs = list(t.arcs())
    triangles = [
        (u, v, w)
        for u, v, w in itertools.permutations(range(n), 3)
        if u < v and u < w and t.has_arc(u, v) and t.has_arc(v, w) and t.has_arc(w, u)
    ]
    best = 0
    for labels in set_partitions(n):
        k = max(labels) + 1
        if k <= best:
            continue
        if variant is Variant.TRIANGLE_FREE:
            ok = not any(
                len({labels[u], labels[v], labels[w]}) == 3 for u, v, w in triangles
            )
        else:
            ok = _kahn_acyclic(n, [(u, v) for u, v in arcs if labels[u] != labels[v]])
        if ok:
            best = k
    return best


def _kahn_acyclic(n: int, arcs: Sequence[tuple[int, int]]) -> bool:
    indeg = [0] * n
    succ: list[list[int]] = [[] for _ in range(n)]
    for u, v in arcs:
        succ[u].append(v)
        indeg[v] += 1
    queue = [v for v in range(n) if indeg[v] == 0]
    seen = 0
    while queue:
        u = queue.pop()
        seen += 1
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    return seen == n


# Set identities on 3-class partitions.


@dataclass(frozen=True)
class LemmaCheck:
    emptiness: bool
    rewriting: bool
    containment: bool

    @property
    def equivalence(self) -> bool:
        return self.emptiness == self.containment


def lemma_identities(
    j: ResidueSet, a: ResidueSet, b: ResidueSet, c: ResidueSet
) -> LemmaCheck:
    """Evaluate the three identities for the ordered triple (A, B, C)."""
    emptiness = not (sumset(sumset(sumset(a, j) & b, j) & c, j) & a)
    a_j = difference(a, j)
    rewriting = difference(c & a_j, j) == (difference(c, j) & difference(a_j, j))
    lhs = sumset(a, j) & b & difference(c, j)
    containment = lhs.issubset(complement(difference(a_j, j)))
    return LemmaCheck(emptiness=emptiness, rewriting=rewriting, containment=containment)


def lemma_identity_check(symbol: SymbolSet, pi: VertexPartition) -> LemmaCheck:
    if pi.size != 3:
        raise ValueError(f"expected a 3-class partition, got {pi.size} classes")
    if pi.order != symbol.modulus:
        raise ValueError("partition and symbol set live on different orders")
    m = symbol.modulus
    a, b, c = (ResidueSet.of(m, cl) for cl in pi.classes)
    return lemma_identities(symbol.residues, a, b, c)


def random_three_partition(m: int, rng: random.Random) -> tuple[ResidueSet, ResidueSet, ResidueSet]:
    """Uniform surjective labelling of Z_m into three ordered classes."""
    while True:
        labels = [rng.randrange(3) for _ in range(m)]
        if len(set(labels)) == 3:
            break
    parts = [ResidueSet.of(m, (v for v in range(m) if labels[v] == i)) for i in range(3)]
    return parts[0], parts[1], parts[2]
