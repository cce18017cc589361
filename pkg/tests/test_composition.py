import itertools

import pytest

from circtour.composition import (
    FactorizationTree,
    compose,
    decompose,
    factorize,
    find_module,
    circulant_split,
    is_simple,
    verify_composition,
)
from circtour.tournament import SymbolSet, build, enumerate_symbol_sets
from circtour.zmod import Subgroup, is_arithmetic_progression, quasi_periodic_witness, sumset

S = SymbolSet.parse


def lexicographic_arcs(outer, inner):
    """Arc set of C(outer)[C(inner)] on pairs (base, copy index)."""
    d, f = build(outer), build(inner)
    verts = list(itertools.product(range(d.order), range(f.order)))
    return {
        (x, y)
        for x in verts
        for y in verts
        if x != y and (d.has_arc(x[0], y[0]) if x[0] != y[0] else f.has_arc(x[1], y[1]))
    }


def pairs(a, b):
    return itertools.product(enumerate_symbol_sets(a // 2), enumerate_symbol_sets(b // 2))


class TestCompose:
    @pytest.mark.parametrize(
        "j, k, expected",
        [
            ("3:1", "3:1", "9:1,3,4,7"),
            ("3:1", "5:1,2", "15:1,3,4,6,7,10,13"),
            ("3:2", "3:1", "9:2,3,5,8"),
        ],
    )
    def test_examples(self, j, k, expected):
        assert compose(S(j), S(k)) == S(expected)

    def test_formula_by_hand(self):
        # 3*{1} = {3};  {1} + 3*[1,3] = {4, 7, 1}
        scaled = {3 * 1 % 9}
        lifted = {(1 + 3 * i) % 9 for i in range(1, 4)}
        assert scaled | lifted == {1, 3, 4, 7}

    @pytest.mark.parametrize("shape", [(3, 3), (3, 5), (5, 3), (3, 7), (5, 5)])
    def test_half_size(self, shape):
        for j, k in pairs(*shape):
            product = compose(j, k)
            assert len(product.residues) == j.half_size * k.modulus + k.half_size

    def test_isomorphic_via_explicit_map(self):
        j, k = S("3:2"), S("5:1,3")
        product = compose(j, k)
        a = j.modulus
        t = build(product)
        mapped = {
            ((x % a, (x - x % a) // a), (y % a, (y - y % a) // a)) for x, y in t.arcs()
        }
        assert mapped == lexicographic_arcs(j, k)


class TestVerify:
    def test_true(self):
        assert verify_composition(S("3:1"), S("3:1"), S("9:1,3,4,7"))

    def test_cyclic_is_not_a_product(self):
        assert not verify_composition(S("3:1"), S("3:1"), S("9:1,2,3,4"))

    def test_round_trip(self):
        j, k = S("3:2"), S("3:1")
        assert verify_composition(j, k, compose(j, k))

    def test_incompatible(self):
        with pytest.raises(ValueError):
            verify_composition(S("3:1"), S("5:1,2"), S("9:1,3,4,7"))


class TestDecompose:
    def test_nine(self):
        assert decompose(S("9:1,3,4,7")) == (S("3:1"), S("3:1"), Subgroup(9, 3))

    def test_simple(self):
        assert decompose(S("9:1,2,3,4")) is None

    def test_fifteen(self):
        outer, inner, h = decompose(S("15:1,3,4,6,7,10,13"))
        assert (outer, inner, h.order) == (S("3:1"), S("5:1,2"), 5)

    @pytest.mark.parametrize("shape", [(3, 3), (3, 5), (5, 3), (3, 7), (7, 3)])
    def test_round_trip(self, shape):
        for j, k in pairs(*shape):
            split = decompose(compose(j, k))
            assert split is not None
            outer, inner, _ = split
            assert compose(outer, inner) == compose(j, k)
            assert verify_composition(outer, inner, compose(j, k))

    def test_composites_at_nine(self):
        composite = {j for j in enumerate_symbol_sets(4) if decompose(j) is not None}
        assert composite == {compose(a, b) for a, b in pairs(3, 3)}
        assert len(composite) == 4

    def test_composites_at_fifteen(self):
        composite = {j for j in enumerate_symbol_sets(7) if decompose(j) is not None}
        expected = {compose(a, b) for a, b in pairs(3, 5)} | {compose(a, b) for a, b in pairs(5, 3)}
        assert composite == expected
        assert len(expected) == 16


class TestFactorize:
    def test_one_step(self):
        tree = factorize(S("9:1,3,4,7"))
        assert tree.leaves() == [S("3:1"), S("3:1")]
        assert tree.to_sexpr() == "(9:{1,3,4,7} (3:{1}) (3:{1}))"

    def test_leaves(self):
        assert factorize(S("7:1,2,4")).is_leaf
        assert factorize(S("9:1,2,3,4")).is_leaf

    def test_three_levels(self):
        inner = compose(S("3:2"), S("3:1"))
        big = compose(S("3:1"), inner)
        tree = factorize(big)
        assert tree.recompose() == big
        assert [leaf.modulus for leaf in tree.leaves()] == [3, 3, 3]
        assert all(is_simple(leaf) for leaf in tree.leaves())

    @pytest.mark.parametrize("shape", [(3, 5), (5, 3), (3, 3)])
    def test_recompose_all(self, shape):
        for j, k in pairs(*shape):
            product = compose(j, k)
            tree = factorize(product)
            assert tree.recompose() == product
            prod = 1
            for leaf in tree.leaves():
                prod *= leaf.modulus
                assert quasi_periodic_witness(leaf.residues) is None
            assert prod == product.modulus

    def test_sexpr_round_trip(self):
        tree = factorize(compose(S("3:1"), compose(S("3:2"), S("5:1,2"))))
        assert FactorizationTree.parse(tree.to_sexpr()) == tree


class TestSimple:
    def test_examples(self):
        assert is_simple(S("9:1,2,3,4"))
        assert not is_simple(S("9:1,3,4,7"))

    @pytest.mark.parametrize("p", [3, 5, 7, 11, 13])
    def test_prime_orders(self, p):
        assert all(is_simple(j) for j in enumerate_symbol_sets(p // 2))

    @pytest.mark.parametrize("n", [4, 7, 10, 12])
    def test_divisor_split_agrees(self, n):
        for j in enumerate_symbol_sets(n):
            split = circulant_split(j)
            assert (split is None) == (quasi_periodic_witness(j.residues) is None)
            if split is not None:
                assert compose(*split) == j

    @pytest.mark.parametrize("n", range(1, 13))
    def test_doubling_bounds(self, n):
        for j in enumerate_symbol_sets(n):
            assert 2 * n - 1 <= len(sumset(j.residues, j.residues)) <= 2 * n

    @pytest.mark.parametrize("n", range(1, 13))
    def test_small_doubling_forces_structure(self, n):
        # non-AP and |J+J| = 2n-1  =>  quasi-periodic
        for j in enumerate_symbol_sets(n):
            if is_arithmetic_progression(j.residues) is None:
                if len(sumset(j.residues, j.residues)) == 2 * n - 1:
                    assert quasi_periodic_witness(j.residues) is not None

    def test_quasi_periodic_with_full_doubling(self):
        # Paley(7) inside Z3 copies: composite yet |L+L| = 2n at order 21
        found = {
            j
            for j in enumerate_symbol_sets(10)
            if is_arithmetic_progression(j.residues) is None
            and quasi_periodic_witness(j.residues) is not None
            and len(sumset(j.residues, j.residues)) == 20
        }
        paley = [S("7:1,2,4"), S("7:3,5,6")]
        assert found == {compose(a, k) for a in (S("3:1"), S("3:2")) for k in paley}


class TestFindModule:
    def test_composite(self):
        t = build(S("9:1,3,4,7"))
        m = find_module(t)
        assert m == {0, 3, 6}
        for v in set(range(9)) - m:
            outs = {t.has_arc(v, u) for u in m}
            assert len(outs) == 1

    def test_paley(self):
        assert find_module(build(S("7:1,2,4"))) is None

    def test_triangle(self):
        assert find_module(build(S("3:1"))) is None

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_closure_route_agrees(self, n):
        for j in enumerate_symbol_sets(n):
            t = build(j)
            assert (find_module(t) is None) == (find_module(t, exhaustive_bound=0) is None)

    def test_composite_has_module(self):
        for a, b in list(pairs(3, 3)) + list(pairs(3, 5)) + list(pairs(5, 3)):
            assert find_module(build(compose(a, b))) is not None

    def test_large_order_closure(self):
        t = build(compose(S("3:1"), S("7:1,2,4")))
        m = find_module(t, exhaustive_bound=15)
        assert m is not None and 2 <= len(m) < 21
