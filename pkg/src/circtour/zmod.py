"""Set algebra over the cyclic group Z_m.

Residue sets are stored as integer bit vectors: bit ``r`` is set iff residue
``r`` is a member.  Translation is a rotation of the vector, so sumsets cost
one shift-or per element of the smaller operand.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Optional


class ModulusMismatch(ValueError):
    """Two residue sets over different moduli were combined."""


class EmptySetError(ValueError):
    """An operation that needs a nonempty set received the empty set."""


def _full(m: int) -> int:
    return (1 << m) - 1


def _rotate(bits: int, k: int, m: int) -> int:
    """Translate every member by ``k`` (mod ``m``)."""
    k %= m
    if k == 0:
        return bits
    return ((bits << k) | (bits >> (m - k))) & _full(m)


def _iter_bits(bits: int) -> Iterator[int]:
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


@dataclass(frozen=True)
class ResidueSet:
    """A subset of Z_m, immutable and hashable."""

    modulus: int
    bits: int = 0

    def __post_init__(self) -> None:
        if self.modulus < 1:
            raise ValueError(f"modulus must be >= 1, got {self.modulus}")
        if self.bits < 0 or self.bits >> self.modulus:
            raise ValueError(f"bit vector has residues outside Z_{self.modulus}")

    @classmethod
    def of(cls, modulus: int, members: Iterable[int]) -> "ResidueSet":
        """Build from explicit residues; each must already lie in [0, m)."""
        bits = 0
        for r in members:
            if not 0 <= r < modulus:
                raise ValueError(f"residue {r} out of range for Z_{modulus}")
            bits |= 1 << r
        return cls(modulus, bits)

    @classmethod
    def reduce(cls, modulus: int, values: Iterable[int]) -> "ResidueSet":
        """Build from arbitrary integers, reducing each mod ``modulus``."""
        bits = 0
        for v in values:
            bits |= 1 << (v % modulus)
        return cls(modulus, bits)

    @classmethod
    def interval(cls, modulus: int, start: int, length: int) -> "ResidueSet":
        return cls.reduce(modulus, range(start, start + length))

    @classmethod
    def full(cls, modulus: int) -> "ResidueSet":
        return cls(modulus, _full(modulus))

    @classmethod
    def empty(cls, modulus: int) -> "ResidueSet":
        return cls(modulus, 0)

    @classmethod
    def parse(cls, text: str) -> "ResidueSet":
        """Parse ``m:{r1,r2,...}``; residues must be in range and distinct."""
        match = re.fullmatch(r"\s*(\d+)\s*:\s*\{([^}]*)\}\s*", text)
        if not match:
            raise ValueError(f"cannot parse residue set {text!r}")
        modulus = int(match.group(1))
        body = match.group(2).strip()
        values = [int(tok) for tok in body.split(",")] if body else []
        if len(set(values)) != len(values):
            raise ValueError(f"duplicate residues in {text!r}")
        return cls.of(modulus, values)

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(_iter_bits(self.bits))

    def __iter__(self) -> Iterator[int]:
        return _iter_bits(self.bits)

    def __len__(self) -> int:
        return bin(self.bits).count("1")

    def __contains__(self, r: object) -> bool:
        return isinstance(r, int) and 0 <= r < self.modulus and bool(self.bits >> r & 1)

    def __bool__(self) -> bool:
        return self.bits != 0

    def __str__(self) -> str:
        return f"{self.modulus}:{{{','.join(map(str, self.members))}}}"

    def _check(self, other: "ResidueSet") -> None:
        if self.modulus != other.modulus:
            raise ModulusMismatch(f"moduli differ: {self.modulus} vs {other.modulus}")

    def __and__(self, other: "ResidueSet") -> "ResidueSet":
        self._check(other)
        return ResidueSet(self.modulus, self.bits & other.bits)

    def __or__(self, other: "ResidueSet") -> "ResidueSet":
        self._check(other)
        return ResidueSet(self.modulus, self.bits | other.bits)

    def __sub__(self, other: "ResidueSet") -> "ResidueSet":
        """Set difference (not the additive difference, see ``difference``)."""
        self._check(other)
        return ResidueSet(self.modulus, self.bits & ~other.bits)

    def issubset(self, other: "ResidueSet") -> bool:
        self._check(other)
        return self.bits & ~other.bits == 0

    def isdisjoint(self, other: "ResidueSet") -> bool:
        self._check(other)
        return self.bits & other.bits == 0

    def shift(self, k: int) -> "ResidueSet":
        return ResidueSet(self.modulus, _rotate(self.bits, k, self.modulus))


@dataclass(frozen=True)
class Subgroup:
    """The subgroup of Z_m of the given order, generated by m // order."""

    modulus: int
    order: int

    def __post_init__(self) -> None:
        if self.order < 1 or self.modulus % self.order:
            raise ValueError(f"{self.order} does not divide {self.modulus}")

    @property
    def generator(self) -> int:
        return self.modulus // self.order

    @property
    def members(self) -> ResidueSet:
        return ResidueSet.of(self.modulus, range(0, self.modulus, self.generator))

    @property
    def is_trivial(self) -> bool:
        return self.order == 1

    def coset(self, c: int) -> ResidueSet:
        return self.members.shift(c)

    def __str__(self) -> str:
        return str(self.members)


@dataclass(frozen=True)
class QuasiPeriodicWitness:
    subgroup: Subgroup
    periodic_part: ResidueSet
    residual_part: ResidueSet
    residual_coset_rep: Optional[int]


@dataclass(frozen=True)
class KneserRecord:
    sum_size: int
    period_order: int
    bound_holds: bool
    periodicity_clause_holds: bool


def sumset(a: ResidueSet, b: ResidueSet) -> ResidueSet:
    a._check(b)
    m = a.modulus
    if len(a) > len(b):
        a, b = b, a
    bits = 0
    for x in a:
        bits |= _rotate(b.bits, x, m)
    return ResidueSet(m, bits)


def negate(a: ResidueSet) -> ResidueSet:
    m = a.modulus
    return ResidueSet.of(m, ((-x) % m for x in a))


def dilate(c: int, a: ResidueSet) -> ResidueSet:
    m = a.modulus
    return ResidueSet.of(m, {(c * x) % m for x in a})


def difference(a: ResidueSet, b: ResidueSet) -> ResidueSet:
    """A - B = A + (-B)."""
    return sumset(a, negate(b))


def complement(a: ResidueSet) -> ResidueSet:
    return ResidueSet(a.modulus, _full(a.modulus) & ~a.bits)


@lru_cache(maxsize=None)
def divisors(m: int) -> tuple[int, ...]:
    return tuple(d for d in range(1, m + 1) if m % d == 0)


def subgroups(m: int) -> list[Subgroup]:
    """All subgroups of Z_m, one per divisor, by increasing order."""
    return [Subgroup(m, d) for d in divisors(m)]


def _require_nonempty(c: ResidueSet) -> None:
    if not c:
        raise EmptySetError("operation requires a nonempty residue set")


def period(c: ResidueSet) -> Subgroup:
    """Stabilizer {g : C + g = C}."""
    _require_nonempty(c)
    m = c.modulus
    # the stabilizer is cyclic; its generator is the least divisor g of m fixing C
    for g in divisors(m):
        if _rotate(c.bits, g, m) == c.bits:
            return Subgroup(m, m // g)
    raise AssertionError("unreachable: g = m always stabilizes")


def is_aperiodic(c: ResidueSet) -> bool:
    return period(c).is_trivial


def _witness_for(c: ResidueSet, h: Subgroup) -> Optional[QuasiPeriodicWitness]:
    m = c.modulus
    g = h.generator
    periodic = 0
    residual = 0
    residual_cosets = 0
    rep = None
    base = h.members.bits
    for r in range(g):
        coset = _rotate(base, r, m)
        inside = c.bits & coset
        if inside == coset:
            periodic |= coset
        elif inside:
            residual |= inside
            residual_cosets += 1
            rep = (inside & -inside).bit_length() - 1
    if residual_cosets > 1:
        return None
    return QuasiPeriodicWitness(
        subgroup=h,
        periodic_part=ResidueSet(m, periodic),
        residual_part=ResidueSet(m, residual),
        residual_coset_rep=rep,
    )


def quasi_periodic_witnesses(c: ResidueSet) -> list[QuasiPeriodicWitness]:
    """Every subgroup that witnesses quasi-periodicity, largest first.

    The whole group is admitted only when C = Z_m; otherwise any proper subset
    would trivially sit inside the single coset of Z_m.
    """
    _require_nonempty(c)
    m = c.modulus
    found = []
    for h in reversed(subgroups(m)):
        if h.is_trivial:
            continue
        if h.order == m and len(c) != m:
            continue
        w = _witness_for(c, h)
        if w is not None:
            found.append(w)
    return found


def quasi_periodic_witness(c: ResidueSet) -> Optional[QuasiPeriodicWitness]:
    """First witness in decreasing order of |H|, or None."""
    _require_nonempty(c)
    m = c.modulus
    for h in reversed(subgroups(m)):
        if h.is_trivial or (h.order == m and len(c) != m):
            continue
        w = _witness_for(c, h)
        if w is not None:
            return w
    return None


def is_quasi_periodic(c: ResidueSet) -> bool:
    return quasi_periodic_witness(c) is not None


def is_arithmetic_progression(a: ResidueSet) -> Optional[tuple[int, int]]:
    """Return ``(start, step)`` with ``A = {start + i*step}``, or None."""
    _require_nonempty(a)
    m = a.modulus
    k = len(a)
    if k == 1:
        return (a.members[0], 1)
    for start in a:
        for step in range(1, m):
            bits = 0
            x = start
            for _ in range(k):
                bits |= 1 << x
                x = (x + step) % m
            if bits == a.bits:
                return (start, step)
    return None


def kneser_check(a: ResidueSet, b: ResidueSet) -> KneserRecord:
    _require_nonempty(a)
    _require_nonempty(b)
    s = sumset(a, b)
    h = period(s)
    hs = h.members
    lhs = len(s)
    middle = len(sumset(a, hs)) + len(sumset(b, hs)) - h.order
    bound = lhs >= middle >= len(a) + len(b) - h.order
    clause = not (lhs <= len(a) + len(b) - 2) or not h.is_trivial
    return KneserRecord(
        sum_size=lhs,
        period_order=h.order,
        bound_holds=bound,
        periodicity_clause_holds=clause,
    )
