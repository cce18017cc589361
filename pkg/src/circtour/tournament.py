"""Circulant tournaments, their triangles, and partition predicates."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Iterator, Sequence

from .zmod import ResidueSet, _iter_bits, _rotate, dilate, negate


class InvalidSymbolSet(ValueError):
    pass


class MalformedPartition(ValueError):
    pass


@dataclass(frozen=True)
class SymbolSet:
    """Dominance pattern J of a circulant tournament on Z_{2n+1}."""

    residues: ResidueSet

    def __post_init__(self) -> None:
        m = self.residues.modulus
        if m < 3 or m % 2 == 0:
            raise InvalidSymbolSet(f"modulus must be odd and >= 3, got {m}")
        if 0 in self.residues:
            raise InvalidSymbolSet(f"{self.residues} contains 0")
        for j in range(1, m // 2 + 1):
            if (j in self.residues) == (m - j in self.residues):
                raise InvalidSymbolSet(
                    f"{self.residues} must contain exactly one of {j}, {m - j}"
                )

    @classmethod
    def of(cls, modulus: int, members: Iterable[int]) -> "SymbolSet":
        try:
            return cls(ResidueSet.of(modulus, members))
        except InvalidSymbolSet:
            raise
        except ValueError as exc:
            raise InvalidSymbolSet(str(exc)) from None

    @classmethod
    def parse(cls, text: str) -> "SymbolSet":
        """Accept ``9:1,3,4,7`` or ``9:{1,3,4,7}``."""
        match = re.fullmatch(r"\s*(\d+)\s*:\s*\{?([^{}]*)\}?\s*", text)
        if not match:
            raise InvalidSymbolSet(f"cannot parse symbol set {text!r}")
        body = match.group(2).strip()
        values = [int(tok) for tok in body.split(",")] if body else []
        if len(set(values)) != len(values):
            raise InvalidSymbolSet(f"duplicate residues in {text!r}")
        return cls.of(int(match.group(1)), values)

    @property
    def modulus(self) -> int:
        return self.residues.modulus

    @property
    def half_size(self) -> int:
        return self.modulus // 2

    @property
    def members(self) -> tuple[int, ...]:
        return self.residues.members

    @property
    def text(self) -> str:
        """Plain form ``2n+1:j1,...,jn``."""
        return f"{self.modulus}:{','.join(map(str, self.members))}"

    def __str__(self) -> str:
        return str(self.residues)

    def __lt__(self, other: "SymbolSet") -> bool:
        return (self.modulus, self.members) < (other.modulus, other.members)


def cyclic_symbol(n: int) -> SymbolSet:
    if n < 1:
        raise ValueError("n must be >= 1")
    return SymbolSet.of(2 * n + 1, range(1, n + 1))


def enumerate_symbol_sets(n: int) -> Iterator[SymbolSet]:
    """All 2**n symbol sets mod 2n+1.

    Choice vector entry i picks j = i+1 (0) or its negative (1); vectors are
    produced in lexicographic order.
    """
    m = 2 * n + 1
    for choice in itertools.product((0, 1), repeat=n):
        bits = 0
        for j, neg in enumerate(choice, start=1):
            bits |= 1 << (m - j if neg else j)
        yield SymbolSet(ResidueSet(m, bits))


def multiply(symbol: SymbolSet, a: int) -> SymbolSet:
    """Image of J under x -> a*x; ``a`` must be a unit mod 2n+1."""
    if gcd(a, symbol.modulus) != 1:
        raise ValueError(f"{a} is not a unit mod {symbol.modulus}")
    return SymbolSet(dilate(a, symbol.residues))


@dataclass(frozen=True)
class CirculantTournament:
    symbol: SymbolSet
    out_masks: tuple[int, ...] = field(init=False, repr=False, compare=False)
    in_masks: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        m = self.symbol.modulus
        jb = self.symbol.residues.bits
        nb = negate(self.symbol.residues).bits
        object.__setattr__(self, "out_masks", tuple(_rotate(jb, v, m) for v in range(m)))
        object.__setattr__(self, "in_masks", tuple(_rotate(nb, v, m) for v in range(m)))

    @property
    def order(self) -> int:
        return self.symbol.modulus

    def has_arc(self, u: int, v: int) -> bool:
        return bool(self.symbol.residues.bits >> ((v - u) % self.order) & 1)

    def arcs(self) -> Iterator[tuple[int, int]]:
        for u in range(self.order):
            for v in _iter_bits(self.out_masks[u]):
                yield (u, v)

    def out_degree(self, v: int) -> int:
        return bin(self.out_masks[v]).count("1")

    def in_degree(self, v: int) -> int:
        return bin(self.in_masks[v]).count("1")

    def __str__(self) -> str:
        return f"C{self.order}({','.join(map(str, self.symbol.members))})"


def build(symbol: SymbolSet) -> CirculantTournament:
    return CirculantTournament(symbol)


@dataclass(frozen=True)
class VertexPartition:
    """Classes ordered by their minimum vertex."""

    classes: tuple[frozenset[int], ...]

    def __init__(self, classes: Iterable[Iterable[int]]):
        cls_list = [frozenset(c) for c in classes]
        if not cls_list:
            raise MalformedPartition("a partition needs at least one class")
        if any(not c for c in cls_list):
            raise MalformedPartition("partition classes must be nonempty")
        seen: set[int] = set()
        for c in cls_list:
            if seen & c:
                raise MalformedPartition(f"classes overlap on {sorted(seen & c)}")
            seen |= c
        if seen != set(range(len(seen))):
            raise MalformedPartition("classes must cover 0..n-1 exactly")
        cls_list.sort(key=min)
        object.__setattr__(self, "classes", tuple(cls_list))

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "VertexPartition":
        groups: dict[int, list[int]] = {}
        for v, lab in enumerate(labels):
            groups.setdefault(lab, []).append(v)
        return cls(groups.values())

    @classmethod
    def parse(cls, text: str) -> "VertexPartition":
        parts = [p.strip() for p in text.strip().split("|")]
        classes = []
        for p in parts:
            if not (p.startswith("{") and p.endswith("}")):
                raise MalformedPartition(f"bad class {p!r}")
            body = p[1:-1].strip()
            classes.append([int(t) for t in body.split(",")] if body else [])
        return cls(classes)

    @property
    def size(self) -> int:
        return len(self.classes)

    @property
    def order(self) -> int:
        return sum(len(c) for c in self.classes)

    def labels(self) -> list[int]:
        lab = [0] * self.order
        for i, c in enumerate(self.classes):
            for v in c:
                lab[v] = i
        return lab

    def __str__(self) -> str:
        return "|".join("{" + ",".join(map(str, sorted(c))) + "}" for c in self.classes)


def _labels_for(t: CirculantTournament, pi: VertexPartition) -> list[int]:
    if pi.order != t.order:
        raise MalformedPartition(
            f"partition covers {pi.order} vertices, tournament has {t.order}"
        )
    return pi.labels()


def directed_triangles(t: CirculantTournament) -> Iterator[tuple[int, int, int]]:
    """Each 3-cycle once, as (u, v, w) with u the least vertex."""
    out = t.out_masks
    for u in range(t.order):
        above = ~((1 << (u + 1)) - 1)
        for v in _iter_bits(out[u] & above):
            for w in _iter_bits(out[v] & t.in_masks[u] & above):
                yield (u, v, w)


def alspach_check(t: CirculantTournament) -> bool:
    """Every arc u->v has some w with v->w->u."""
    return all(t.out_masks[v] & t.in_masks[u] for u, v in t.arcs())


def external_arcs(t: CirculantTournament, pi: VertexPartition) -> set[tuple[int, int]]:
    lab = _labels_for(t, pi)
    return {(u, v) for u, v in t.arcs() if lab[u] != lab[v]}


def is_externally_c3_free(t: CirculantTournament, pi: VertexPartition) -> bool:
    lab = _labels_for(t, pi)
    return not any(
        lab[u] != lab[v] and lab[v] != lab[w] and lab[u] != lab[w]
        for u, v, w in directed_triangles(t)
    )


def is_externally_acyclic(t: CirculantTournament, pi: VertexPartition) -> bool:
    lab = _labels_for(t, pi)
    n = t.order
    cross = [0] * len(pi.classes)
    for i, c in enumerate(pi.classes):
        cross[i] = ((1 << n) - 1) & ~sum(1 << v for v in c)
    # 0 = unvisited, 1 = on stack, 2 = done
    color = [0] * n
    for root in range(n):
        if color[root]:
            continue
        color[root] = 1
        stack = [(root, t.out_masks[root] & cross[lab[root]])]
        while stack:
            u, pending = stack[-1]
            if not pending:
                color[u] = 2
                stack.pop()
                continue
            low = pending & -pending
            stack[-1] = (u, pending ^ low)
            v = low.bit_length() - 1
            if color[v] == 1:
                return False
            if color[v] == 0:
                color[v] = 1
                stack.append((v, t.out_masks[v] & cross[lab[v]]))
    return True


def singular_count(pi: VertexPartition) -> int:
    return sum(1 for c in pi.classes if len(c) == 1)
