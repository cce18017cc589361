import json
import random

import pytest

from circtour.composition import compose
from circtour.disconnection import (
    SearchBoundExceeded,
    SearchBounds,
    Variant,
    brute_force_value,
    disconnection_value,
    enumerate_optimal_partitions,
    enumerate_valid_partitions,
    find_partition,
    is_tight,
    keenness,
    keenness_check,
    lemma_identities,
    lemma_identity_check,
    max_singletons,
    omega,
    omega3,
    random_three_partition,
    set_partitions,
)
from circtour.tournament import (
    SymbolSet,
    VertexPartition,
    build,
    enumerate_symbol_sets,
    is_externally_acyclic,
    is_externally_c3_free,
    singular_count,
)
from circtour.zmod import ResidueSet, complement, difference, sumset

S = SymbolSet.parse
P = VertexPartition.parse
T = lambda text: build(S(text))  # noqa: E731

COMPOSITE_9 = "9:1,3,4,7"


def bell(n):
    row = [1]
    for _ in range(n - 1):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[-1]


class TestValues:
    @pytest.mark.parametrize(
        "text, w3, w",
        [("3:1", 2, 2), ("7:1,2,4", 2, 2), ("9:1,2,3,4", 2, 2), (COMPOSITE_9, 3, 3)],
    )
    def test_examples(self, text, w3, w):
        t = T(text)
        assert omega3(t).value == w3
        assert omega(t).value == w

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_against_brute_force(self, n):
        for j in enumerate_symbol_sets(n):
            t = build(j)
            for variant in Variant:
                assert disconnection_value(t, variant) == brute_force_value(t, variant)

    def test_omega_at_most_omega3(self):
        for j in enumerate_symbol_sets(5):
            t = build(j)
            assert 2 <= disconnection_value(t, Variant.ACYCLIC) <= disconnection_value(
                t, Variant.TRIANGLE_FREE
            )

    def test_witness_partition(self):
        t = T(COMPOSITE_9)
        pi = P("{0}|{3,6}|{1,2,4,5,7,8}")
        assert is_externally_c3_free(t, pi)
        assert is_externally_acyclic(t, pi)
        found = find_partition(t, Variant.TRIANGLE_FREE, 3)
        assert found.size == 3 and is_externally_c3_free(t, found)
        assert find_partition(t, Variant.TRIANGLE_FREE, 4) is None


class TestTight:
    def test_examples(self):
        assert is_tight(T("9:1,2,3,4"))
        assert not is_tight(T(COMPOSITE_9))
        assert is_tight(T("3:1"))

    def test_prime_13(self):
        assert all(is_tight(build(j)) for j in enumerate_symbol_sets(6))

    def test_coset_partition_is_not_a_witness(self):
        # the copies of the inner factor carry the outer triangle
        t = T(COMPOSITE_9)
        assert not is_externally_c3_free(t, P("{0,3,6}|{1,4,7}|{2,5,8}"))


class TestEnumeration:
    def test_c3(self):
        parts = {str(p) for p in enumerate_optimal_partitions(T("3:1"), Variant.TRIANGLE_FREE)}
        assert parts == {"{0}|{1,2}", "{0,1}|{2}", "{0,2}|{1}"}

    def test_paley_all_two_classes(self):
        parts = list(enumerate_optimal_partitions(T("7:1,2,4"), Variant.TRIANGLE_FREE))
        # every 2-class split is valid: 2^6 - 1 of them
        assert len(parts) == 63
        assert all(p.size == 2 for p in parts)

    @pytest.mark.parametrize("variant", list(Variant))
    def test_composite_nine(self, variant):
        t = T(COMPOSITE_9)
        parts = list(enumerate_optimal_partitions(t, variant))
        assert parts
        assert all(p.size == 3 and singular_count(p) == 1 for p in parts)
        assert len(parts) == len(set(parts))

    @pytest.mark.parametrize("text", ["3:1", "7:1,2,4", "7:1,2,3", COMPOSITE_9])
    def test_matches_filtered_set_partitions(self, text):
        t = build(S(text))
        for variant, pred in (
            (Variant.TRIANGLE_FREE, is_externally_c3_free),
            (Variant.ACYCLIC, is_externally_acyclic),
        ):
            brute = {
                pi
                for pi in map(VertexPartition.from_labels, set_partitions(t.order))
                if pred(t, pi)
            }
            assert set(enumerate_valid_partitions(t, variant)) == brute
            best = max(p.size for p in brute)
            assert set(enumerate_optimal_partitions(t, variant)) == {
                p for p in brute if p.size == best
            }

    def test_set_partitions_bell(self):
        assert [sum(1 for _ in set_partitions(n)) for n in range(1, 8)] == [bell(n) for n in range(1, 8)]


class TestReport:
    def test_histogram_and_count(self):
        rep = omega3(T(COMPOSITE_9))
        assert rep.singular_histogram == {1: rep.partition_count}
        assert not rep.truncated
        assert len(rep.optimal_partitions) == rep.partition_count

    def test_truncation_flag(self):
        rep = omega3(T("7:1,2,4"), SearchBounds(max_listed_partitions=5))
        assert rep.truncated and len(rep.optimal_partitions) == 5
        assert rep.partition_count == 63

    def test_json(self):
        rec = json.loads(omega(T("3:1")).to_json())
        assert rec["variant"] == "acyclic" and rec["value"] == 2
        for key in ("partition_count", "singular_histogram", "elapsed", "nodes"):
            assert key in rec


class TestBounds:
    def test_report_refused_above_bound(self):
        with pytest.raises(SearchBoundExceeded):
            omega3(T("15:1,2,3,4,5,6,7"))

    def test_decision_refused_above_bound(self):
        with pytest.raises(SearchBoundExceeded):
            is_tight(build(SymbolSet.of(23, range(1, 12))))

    def test_allow_slow_lifts_refusal(self):
        b = SearchBounds(report_order=7, allow_slow=True)
        assert disconnection_value(T("9:1,2,3,4"), Variant.ACYCLIC, b) == 2

    def test_configured_bound(self):
        with pytest.raises(SearchBoundExceeded):
            omega(T("9:1,2,3,4"), SearchBounds(report_order=7))


class TestKeenness:
    @pytest.mark.parametrize("variant", list(Variant))
    def test_composite_nine(self, variant):
        k = keenness(T(COMPOSITE_9), variant)
        assert k.keen and k.all_optimal_have_one_singleton and k.value == 3

    def test_paley(self):
        k = keenness(T("7:1,2,4"), Variant.TRIANGLE_FREE)
        assert keenness_check(T("7:1,2,4"), Variant.TRIANGLE_FREE)
        assert k.has_optimal_with_one_singleton and k.max_singletons_any_valid == 1
        # value 2: splits with two big classes are optimal too
        assert not k.all_optimal_have_one_singleton
        assert k.singular_histogram == {1: 7, 0: 56}

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_max_singletons_against_enumeration(self, n):
        for j in enumerate_symbol_sets(n):
            t = build(j)
            for variant in Variant:
                expected = max(singular_count(p) for p in enumerate_valid_partitions(t, variant))
                assert max_singletons(t, variant) == expected

    @pytest.mark.parametrize("variant", list(Variant))
    def test_fifteen_has_optimal_partition_without_singleton(self, variant):
        t = T("15:1,3,4,6,7,10,13")
        pi = P("{0,1,3,4,6,7,9,10,12,13}|{2,5,8}|{11,14}")
        assert is_externally_c3_free(t, pi) and is_externally_acyclic(t, pi)
        k = keenness(t, variant, SearchBounds(report_order=15))
        assert k.value == 3 and k.keen
        expected = {Variant.TRIANGLE_FREE: {1: 15, 0: 30}, Variant.ACYCLIC: {1: 15, 0: 15}}
        assert k.singular_histogram == expected[variant]

    def test_triangle(self):
        k = keenness(T("3:1"), Variant.ACYCLIC)
        assert k.keen and k.all_optimal_have_one_singleton


def brute_lemmas(j, a, b, c):
    m = j.modulus
    js = set(j)
    plus = lambda xs: {(x + y) % m for x in xs for y in js}  # noqa: E731
    minus = lambda xs: {(x - y) % m for x in xs for y in js}  # noqa: E731
    A, B, C = set(a), set(b), set(c)
    emptiness = not (plus(plus(plus(A) & B) & C) & A)
    rewriting = minus(C & minus(A)) == minus(C) & minus(minus(A))
    containment = plus(A) & B & minus(C) <= set(range(m)) - minus(minus(A))
    return emptiness, rewriting, containment


class TestLemmas:
    def test_against_plain_sets(self):
        rng = random.Random(1)
        for m in (7, 9, 11):
            syms = list(enumerate_symbol_sets(m // 2))
            for _ in range(300):
                j = rng.choice(syms).residues
                a, b, c = random_three_partition(m, rng)
                chk = lemma_identities(j, a, b, c)
                assert (chk.emptiness, chk.rewriting, chk.containment) == brute_lemmas(j, a, b, c)

    def test_coset_partition(self):
        chk = lemma_identity_check(S(COMPOSITE_9), P("{0,3,6}|{1,4,7}|{2,5,8}"))
        assert (chk.emptiness, chk.rewriting, chk.containment) == (False, True, False)

    def test_rewriting_is_only_an_inclusion(self):
        j, a, c = ResidueSet.of(7, [1, 2, 3]), ResidueSet.of(7, [0]), ResidueSet.of(7, [1])
        lhs = difference(c & difference(a, j), j)
        rhs = difference(c, j) & difference(difference(a, j), j)
        assert lhs == ResidueSet.empty(7) and rhs == ResidueSet.of(7, [5])

    def test_rewriting_inclusion_holds(self):
        rng = random.Random(3)
        for m in (7, 9, 11, 13):
            syms = list(enumerate_symbol_sets(m // 2))
            for _ in range(500):
                j = rng.choice(syms).residues
                a, _, c = random_three_partition(m, rng)
                lhs = difference(c & difference(a, j), j)
                rhs = difference(c, j) & difference(difference(a, j), j)
                assert lhs.issubset(rhs)

    def test_containment_implies_emptiness(self):
        rng = random.Random(5)
        for m in (7, 9, 11, 13):
            syms = list(enumerate_symbol_sets(m // 2))
            for _ in range(500):
                chk = lemma_identities(rng.choice(syms).residues, *random_three_partition(m, rng))
                if chk.containment:
                    assert chk.emptiness

    @pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
    def test_emptiness_when_singleton_comes_first(self, n):
        # every C3-free 3-partition, ordered with its singleton class as A
        for j in enumerate_symbol_sets(n):
            t = build(j)
            for pi in enumerate_optimal_partitions(t, Variant.TRIANGLE_FREE, SearchBounds(report_order=15)):
                if pi.size != 3 or singular_count(pi) != 1:
                    continue
                single = [cl for cl in pi.classes if len(cl) == 1]
                others = [cl for cl in pi.classes if len(cl) != 1]
                for b, c in (others, others[::-1]):
                    m = t.order
                    chk = lemma_identities(
                        j.residues, *(ResidueSet.of(m, cl) for cl in (single[0], b, c))
                    )
                    assert chk.emptiness

    def test_emptiness_fails_with_singleton_last(self):
        j = S(COMPOSITE_9)
        pi_abc = [[0, 1, 3, 4, 6, 7], [2, 5], [8]]
        assert is_externally_c3_free(build(j), VertexPartition(pi_abc))
        chk = lemma_identities(j.residues, *(ResidueSet.of(9, cl) for cl in pi_abc))
        assert not chk.emptiness

    def test_three_partition_required(self):
        with pytest.raises(ValueError):
            lemma_identity_check(S("3:1"), P("{0}|{1,2}"))

    def test_random_partition_surjective(self):
        rng = random.Random(0)
        for _ in range(100):
            parts = random_three_partition(9, rng)
            assert all(parts)
            assert sum(len(p) for p in parts) == 9
            assert complement(parts[0] | parts[1]) == parts[2]

    def test_sumset_oriented_equivalence_on_triangles(self):
        # a rainbow triangle a->b->c->a exists iff ((A+J) n B + J) n C meets A - J... by definition
        j = S("7:1,2,4")
        t = build(j)
        a, b, c = (ResidueSet.of(7, x) for x in ([0], [1], [2, 3, 4, 5, 6]))
        step = sumset(sumset(a, j.residues) & b, j.residues) & c
        has_rainbow = any(
            t.has_arc(x, y) and t.has_arc(y, z) and t.has_arc(z, x)
            for x in a for y in b for z in c
        )
        assert has_rainbow == bool(sumset(step, j.residues) & a)
