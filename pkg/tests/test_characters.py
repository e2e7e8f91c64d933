import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jetchar.basefield import ONE, ZERO, T, rank
from jetchar.characters import (InvariantViolation, additivity_defect, character_space,
                                del_action, derive_h, dim_formula, iota_leading_check, is_character,
                                solve_characters, solve_formal_characters, splitting_numbers,
                                stability_check)
from jetchar.diffring import JetVar, Side
from jetchar.groups import catalog, ga, gm, legendre
from jetchar.picard_fuchs import picard_fuchs
from jetchar.verify import (all_groups, legendre6, order_growth_case, leading_row_case, shift_rank_case,
                            random_character, space_of, twisted_gm)


def gm_dlog(D=8):
    G = gm(D)
    ring = G.single_ring(1)
    x, x1 = ring.var(0), ring.var(0, 1)
    geo = sum(((-x) ** k for k in range(1, D)), ring.one())
    return G, x1 * geo


class TestDefect:
    def test_ga_derivative_is_additive(self):
        G = ga(6)
        assert additivity_defect(G, 1, G.single_ring(1).var(0, 1)).is_zero()

    def test_gm_derivative_is_not(self):
        G = gm(6)
        d = additivity_defect(G, 1, G.single_ring(1).var(0, 1))
        R = d.ring
        X, Y = R.var(0, 0, Side.LEFT), R.var(0, 0, Side.RIGHT)
        X1, Y1 = R.var(0, 1, Side.LEFT), R.var(0, 1, Side.RIGHT)
        assert d == X1 * Y + X * Y1

    def test_gm_dlog_geometric_series(self):
        G, dlog = gm_dlog()
        assert is_character(G, 1, dlog)


class TestSolve:
    def test_ga_level2(self):
        basis = solve_characters(ga(6), 2, verify=True)
        assert len(basis) == 3
        assert rank([c.vec for c in basis]) == 3

    def test_gm_level1(self):
        (ch,) = solve_characters(gm(8), 1, verify=True)
        assert ch.linear() == {JetVar(0, 1): ONE}
        _, dlog = gm_dlog()
        assert ch.theta == dlog

    @pytest.mark.parametrize("D", [6, 8])
    def test_legendre_manin_character(self, D):
        G = legendre(None, D)
        assert [len(solve_characters(G, n, verify=(n == 2))) for n in range(3)] == [0, 0, 1]

    def test_legendre_stability(self):
        assert stability_check(legendre6(), 3)

    def test_formal_ansatz_is_larger(self):
        # every formal character passes the additivity equation; algebraicity cuts it down
        for G, n, dim in ((gm(8), 2, 3), (legendre6(), 2, 3)):
            formal = solve_formal_characters(G, n)
            assert len(formal) == dim == (n + 1) * G.g
            alg = [c.vec for c in solve_characters(G, n)]
            assert rank(formal + alg) == len(formal)


class TestDelAction:
    def test_ga(self):
        (x,) = [c for c in solve_characters(ga(6), 0)]
        assert del_action(x).linear() == {JetVar(0, 1): x.vec[0]}

    def test_gm_dlog(self):
        (ch,) = solve_characters(gm(8), 1)
        d = del_action(ch)
        assert d.order == 2 and d.leading() == [ONE]

    def test_legendre_verified(self):
        (ch,) = solve_characters(legendre6(), 2)
        d = del_action(ch)
        assert d.order == 3


class TestPrimitiveData:
    @pytest.mark.parametrize("name, l, h, mlu", [
        ("ga", [1, 0, 0, 0, 0], [0, 0, 0, 0, 0], (0, 0)),
        ("gm", [0, 1, 0, 0, 0], [0, 0, 0, 0, 0], (1, 1)),
        ("ga*gm", [1, 1, 0, 0, 0], [0, 0, 0, 0, 0], (0, 1)),
        ("ga^2*gm", [2, 1, 0, 0, 0], [0, 0, 0, 0, 0], (0, 1)),
    ])
    def test_exact_groups(self, name, l, h, mlu):
        sp = character_space(catalog(name, 8), 4)
        assert sp.l == l and sp.h == h and (sp.m_l, sp.m_u) == mlu
        assert sp.stable is None

    def test_legendre(self):
        sp = space_of(legendre6())
        assert sp.dimX == [0, 0, 1, 2]
        assert sp.l == [0, 0, 1, 0]
        assert sp.h == [0, 1, 0, 0]
        assert (sp.m_l, sp.m_u) == (2, 2)
        assert sp.stable is True

    def test_twisted_gm(self):
        sp = space_of(twisted_gm())
        assert sp.dimX[:4] == [0, 1, 2, 3]
        (ch,) = sp.primitive.characters
        # d log(1 + c x) with c = t^2 + 1, normalized on x
        assert ch.vec == [ONE, (T ** 2 + 1) / (2 * T)]

    def test_ga_basis(self):
        pb = space_of(ga(8)).primitive
        assert pb.orders == [0] and pb.A == [[ONE]]

    def test_ga_gm_basis(self):
        G = catalog("ga*gm", 8)
        pb = space_of(G).primitive
        assert pb.orders == [0, 1] and pb.m == 1
        assert pb.A == [[ONE, ZERO], [ZERO, ONE]]
        assert pb.tilde[0].linear() == {JetVar(0, 1): ONE}
        assert pb.tilde[1].linear() == {JetVar(1, 1): ONE}

    def test_legendre_picard_fuchs(self):
        pb = space_of(legendre6()).primitive
        (ch,) = pb.characters
        a0, a1, a2 = ch.vec
        c0, c1, c2 = picard_fuchs()
        assert a2 and pb.A == [[a2]]
        assert a1 / a2 == c1 == (1 - 2 * T) / (T * (1 - T))
        assert a0 / a2 == c0 == -1 / (4 * T * (1 - T))

    def test_splitting_numbers_rejects_inverted(self):
        with pytest.raises(InvariantViolation):
            splitting_numbers([0, 0, 1], [1, 0, 0], 1)


class TestDeriveH:
    @pytest.mark.parametrize("l, g, h", [
        ([1, 0, 0], 1, [0, 0, 0]),
        ([0, 1, 0], 1, [0, 0, 0]),
        ([0, 0, 1, 0], 1, [0, 1, 0, 0]),
        ([0, 0, 1, 1, 0], 2, [0, 2, 1, 0, 0]),
    ])
    def test_examples(self, l, g, h):
        assert derive_h(l, g) == h

    def test_negative(self):
        with pytest.raises(InvariantViolation):
            derive_h([1, 1, 0], 1)

    @given(st.lists(st.integers(0, 3), min_size=2, max_size=7), st.integers(1, 4))
    def test_properties(self, l, g):
        try:
            h = derive_h(l, g)
        except InvariantViolation:
            assert g - l[0] - l[1] < 0 or sum(l) > g
            return
        assert all(x >= 0 for x in h)
        assert all(h[k] <= h[k - 1] for k in range(2, len(h)))


class TestIota:
    def test_gm_dlog(self):
        (ch,) = solve_characters(gm(8), 1)
        assert iota_leading_check(ch)
        assert iota_leading_check(ch.derive())

    def test_legendre(self):
        (ch,) = solve_characters(legendre6(), 2)
        assert iota_leading_check(ch)

    def test_order_zero(self):
        (ch,) = solve_characters(ga(6), 0)
        with pytest.raises(ValueError):
            iota_leading_check(ch)


class TestStructure:
    @pytest.mark.parametrize("k", range(6))
    def test_dim_formula(self, k):
        sp = space_of(all_groups()[k])
        assert all(sp.dimX[n] == dim_formula(sp.l, n) for n in range(sp.N + 1))
        assert sum(sp.l) == sp.G.g

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_leading_row(self, seed):
        assert leading_row_case(random.Random(seed)) is True

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_order_growth(self, seed):
        assert order_growth_case(random.Random(seed)) is True

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_shift_rank(self, seed):
        assert shift_rank_case(random.Random(seed)) is True

    def test_random_characters_are_characters(self):
        rng = random.Random(3)
        for G in (gm(8), catalog("ga*gm", 8), legendre6()):
            for _ in range(3):
                ch = random_character(space_of(G), rng)
                assert is_character(G, ch.level, ch.theta)
