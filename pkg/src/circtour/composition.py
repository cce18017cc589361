"""Lexicographic composition of circulant tournaments and its inverse."""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass
from typing import Optional

from .tournament import CirculantTournament, SymbolSet, build
from .zmod import ResidueSet, Subgroup, _iter_bits, quasi_periodic_witness, sumset


class CompositionError(RuntimeError):
    """Internal inconsistency: two independent criteria disagree."""


def compose(outer: SymbolSet, inner: SymbolSet) -> SymbolSet:
    """Symbol set of C(outer)[C(inner)] on Z_{(2m+1)(2n+1)}.

    L = (2m+1)K  u  (J + (2m+1)[1, 2n+1]).
    """
    a, b = outer.modulus, inner.modulus
    big = a * b
    scaled = ResidueSet.reduce(big, (a * k for k in inner.members))
    h = ResidueSet.reduce(big, (a * i for i in range(1, b + 1)))
    lifted = ResidueSet.reduce(big, outer.members)
    return SymbolSet(scaled | sumset(lifted, h))


def verify_composition(outer: SymbolSet, inner: SymbolSet, product: SymbolSet) -> bool:
    """Compare the arcs of C(product) with those of C(outer)[C(inner)].

    Residue x corresponds to base vertex x mod (2m+1) and copy index
    (x - base) / (2m+1); copies are the residue classes mod 2m+1.
    """
    a, b = outer.modulus, inner.modulus
    if product.modulus != a * b:
        raise ValueError(f"modulus {product.modulus} != {a} * {b}")
    d_outer = build(outer)
    d_inner = build(inner)
    t = build(product)

    def coords(x: int) -> tuple[int, int]:
        base = x % a
        return base, (x - base) // a

    for x in range(a * b):
        bx, fx = coords(x)
        for y in range(a * b):
            if x == y:
                continue
            by, fy = coords(y)
            if bx == by:
                expected = d_inner.has_arc(fx, fy)
            else:
                expected = d_outer.has_arc(bx, by)
            if t.has_arc(x, y) != expected:
                return False
    return True


def decompose(symbol: SymbolSet) -> Optional[tuple[SymbolSet, SymbolSet, Subgroup]]:
    """Split L into (outer, inner, H) with compose(outer, inner) == L."""
    w = quasi_periodic_witness(symbol.residues)
    if w is None:
        return None
    h = w.subgroup
    big = symbol.modulus
    a = h.generator
    if not w.residual_part or not w.residual_part.issubset(h.members):
        raise CompositionError(
            f"witness for {symbol} has residual part {w.residual_part} outside {h}"
        )
    reps = set()
    seen = 0
    for x in w.periodic_part:
        if seen >> (x % a) & 1:
            continue
        seen |= 1 << (x % a)
        reps.add(x % a)
    try:
        outer = SymbolSet.of(a, reps)
        inner = SymbolSet.of(h.order, (c // a for c in w.residual_part))
    except ValueError as exc:
        raise CompositionError(f"factors of {symbol} are not symbol sets: {exc}") from None
    if compose(outer, inner) != symbol:
        raise CompositionError(f"factors of {symbol} do not recompose")
    assert outer.modulus * inner.modulus == big
    return outer, inner, h


@dataclass(frozen=True)
class FactorizationTree:
    node: SymbolSet
    outer: Optional["FactorizationTree"] = None
    inner: Optional["FactorizationTree"] = None

    @property
    def is_leaf(self) -> bool:
        return self.outer is None

    def leaves(self) -> list[SymbolSet]:
        if self.is_leaf:
            return [self.node]
        return self.outer.leaves() + self.inner.leaves()

    def recompose(self) -> SymbolSet:
        if self.is_leaf:
            return self.node
        return compose(self.outer.recompose(), self.inner.recompose())

    def to_sexpr(self) -> str:
        if self.is_leaf:
            return f"({self.node})"
        return f"({self.node} {self.outer.to_sexpr()} {self.inner.to_sexpr()})"

    def __str__(self) -> str:
        return self.to_sexpr()

    @classmethod
    def parse(cls, text: str) -> "FactorizationTree":
        tokens = re.findall(r"\(|\)|\d+:\{[^}]*\}", text)
        pos = 0

        def walk() -> FactorizationTree:
            nonlocal pos
            if tokens[pos] != "(":
                raise ValueError(f"expected '(' at token {pos} of {text!r}")
            pos += 1
            node = SymbolSet.parse(tokens[pos])
            pos += 1
            if tokens[pos] == ")":
                pos += 1
                return cls(node)
            outer = walk()
            inner = walk()
            if tokens[pos] != ")":
                raise ValueError(f"expected ')' at token {pos} of {text!r}")
            pos += 1
            return cls(node, outer, inner)

        tree = walk()
        if pos != len(tokens):
            raise ValueError(f"trailing tokens in {text!r}")
        return tree


def factorize(symbol: SymbolSet) -> FactorizationTree:
    split = decompose(symbol)
    if split is None:
        return FactorizationTree(symbol)
    outer, inner, _ = split
    return FactorizationTree(symbol, factorize(outer), factorize(inner))


def circulant_split(symbol: SymbolSet) -> Optional[tuple[SymbolSet, SymbolSet]]:
    """Factor pair found by trying every divisor split, or None.

    For each a | N with 1 < a < N the only candidate outer factor is the set of
    nonzero residues of L mod a, and the only candidate inner factor is
    L n aZ divided by a; the split counts if both are symbol sets and they
    recompose to L.  No witness or coset machinery is involved.
    """
    big = symbol.modulus
    members = symbol.members
    for a in range(3, big, 2):
        if big % a:
            continue
        outer = {x % a for x in members if x % a}
        inner = [x // a for x in members if x % a == 0]
        try:
            j = SymbolSet.of(a, outer)
            k = SymbolSet.of(big // a, inner)
        except ValueError:
            continue
        if compose(j, k) == symbol:
            return j, k
    return None


def is_simple(symbol: SymbolSet) -> bool:
    """True iff L has no quasi-periodic witness.

    The divisor-split search must agree; any disagreement is an
    implementation fault and raises.
    """
    witness_free = quasi_periodic_witness(symbol.residues) is None
    if witness_free != (circulant_split(symbol) is None):
        raise CompositionError(
            f"{symbol}: witness scan says simple={witness_free}, divisor splits disagree"
        )
    return witness_free


def _is_module(t: CirculantTournament, mask: int) -> bool:
    outside = ((1 << t.order) - 1) & ~mask
    for v in _iter_bits(outside):
        hit = t.out_masks[v] & mask
        if hit and hit != mask:
            return False
    return True


def _closure(t: CirculantTournament, mask: int) -> int:
    """Smallest module containing ``mask``: absorb splitters until none remain."""
    full = (1 << t.order) - 1
    changed = True
    while changed:
        changed = False
        for v in _iter_bits(full & ~mask):
            hit = t.out_masks[v] & mask
            if hit and hit != mask:
                mask |= 1 << v
                changed = True
    return mask


def find_module(
    t: CirculantTournament, exhaustive_bound: int = 15, seed: int = 0
) -> Optional[frozenset[int]]:
    """A nontrivial module of ``t``, or None.

    Up to ``exhaustive_bound`` vertices every subset of size 2..n-1 is tried,
    smallest first.  Above it, pairs are closed under splitters in a seeded
    random order, which is still exact: a nontrivial module exists iff some
    pair closes to a proper subset.
    """
    n = t.order
    full = (1 << n) - 1
    if n <= exhaustive_bound:
        for size in range(2, n):
            for combo in itertools.combinations(range(n), size):
                mask = 0
                for v in combo:
                    mask |= 1 << v
                if _is_module(t, mask):
                    return frozenset(combo)
        return None
    pairs = list(itertools.combinations(range(n), 2))
    random.Random(seed).shuffle(pairs)
    for u, v in pairs:
        mask = _closure(t, (1 << u) | (1 << v))
        if mask != full:
            return frozenset(_iter_bits(mask))
    return None
