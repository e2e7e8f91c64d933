import random

import pytest
from flint import fmpq

from jetchar.basefield import ONE, ZERO, RatFunc, T
from jetchar.diffring import JetVar, Side
from jetchar.groups import (LawAxiomError, catalog, check_lambda, check_law_axioms,
                            check_Nn_additive, formal_log, ga, gm, h_linearity, legendre,
                            legendre_log_series, nn_coordinates_primitive,
                            restricted_N_law)
from jetchar.parser import parse_group_text
from jetchar.verify import legendre6, prolongation_square_case


def XY(G):
    R = G.tensor_ring(0)
    return R, R.var(0, 0, Side.LEFT), R.var(0, 0, Side.RIGHT)


class TestCatalog:
    def test_ga(self):
        R, X, Y = XY(ga(6))
        assert ga(6).comul[0] == X + Y

    def test_gm_is_multiplicative(self):
        G = gm(6)
        R, X, Y = XY(G)
        assert R.one() + G.comul[0] == (R.one() + X) * (R.one() + Y)

    def test_products(self):
        G = catalog("ga^2*gm", 6)
        assert G.g == 3 and G.declared_r == 0 and G.exact
        assert [off for off, _ in G.factors] == [0, 1, 2]
        check_law_axioms(G)

    def test_unknown(self):
        with pytest.raises(KeyError):
            catalog("sl2")

    def test_lambda_degenerate(self):
        for bad in (0, 1):
            with pytest.raises(ValueError):
                check_lambda(bad)
        assert check_lambda(T) == T

    def test_legendre_low_degree(self):
        # independent oracle: for y^2 = x^3 + a2 x^2 + a4 x the law is
        # X + Y - a2 (X^2 Y + X Y^2) + O(5), with a2 = -(1 + lam)
        G = legendre6()
        R, X, Y = XY(G)
        F = G.comul[0]
        assert F.homogeneous_part(1) == X + Y
        assert F.homogeneous_part(2).is_zero()
        assert F.homogeneous_part(3) == (X * X * Y + X * Y * Y).scale(1 + T)
        assert F.homogeneous_part(4).is_zero()

    @pytest.mark.parametrize("D", [6, 8])
    def test_legendre_axioms(self, D):
        check_law_axioms(legendre(None, D))

    def test_legendre_other_lambda(self):
        G = legendre(T ** 2 + 2, 6)
        check_law_axioms(G)
        R, X, Y = XY(G)
        assert G.comul[0].homogeneous_part(3) == (X * X * Y + X * Y * Y).scale(T ** 2 + 3)


class TestFormalLog:
    def test_ga(self):
        (l,) = formal_log(ga(6))
        assert l == l.ring.var(0)

    def test_gm_is_log1p(self):
        (l,) = formal_log(gm(8))
        for k in range(1, 9):
            assert l.coefficient({JetVar(0, 0): k}) == RatFunc(fmpq((-1) ** (k + 1), k))

    def test_legendre_log_closed_form(self):
        # omega = (1 + a2 z^2 + (a2^2 + 2 a4) z^4 + ...) dz
        lam = T
        a2, a4 = -(ONE + lam), lam
        ell = legendre_log_series(lam, 7)
        assert ell[:6] == [ZERO, ONE, ZERO, a2 / 3, ZERO, (a2 * a2 + 2 * a4) / 5]

    def test_legendre_log_prefix_stable(self):
        # a shorter expansion is a prefix of a longer one
        long = legendre_log_series(T, 12)
        for N in range(2, 12):
            assert legendre_log_series(T, N) == long[:N]

    def test_legendre_round_trip(self):
        # l(F(X, Y)) = l(X) + l(Y) mod degree D + 1
        G = legendre6()
        R, X, Y = XY(G)
        ell = legendre_log_series(T, G.trunc + 1)

        def apply(p):
            acc = R.zero()
            for c in reversed(ell):
                acc = acc * p + c
            return acc

        assert apply(G.comul[0]) == apply(X) + apply(Y)


class TestAxioms:
    def test_identity_violation(self):
        with pytest.raises(LawAxiomError) as e:
            parse_group_text('name = "bad"\ndim = 1\nvars = ["x0"]\ncomul = ["x0 + y0 + x0^2"]\n')
        assert e.value.axiom == "identity"

    def test_commutativity_violation(self):
        with pytest.raises(LawAxiomError) as e:
            parse_group_text('name = "bad"\ndim = 1\nvars = ["x0"]\ncomul = ["x0 + y0 + x0^2*y0"]\n')
        assert e.value.axiom == "commutativity"

    def test_associativity_violation(self):
        with pytest.raises(LawAxiomError) as e:
            parse_group_text('name = "bad"\ndim = 1\nvars = ["x0"]\ncomul = ["x0 + y0 + x0^2*y0^2"]\ntrunc = 4\n')
        assert e.value.axiom == "associativity"


class TestJetComul:
    def test_gm_level1(self):
        jc = gm(6).jet_comul(1)
        R = jc.ring
        X, Y = R.var(0, 0, Side.LEFT), R.var(0, 0, Side.RIGHT)
        X1, Y1 = R.var(0, 1, Side.LEFT), R.var(0, 1, Side.RIGHT)
        assert jc.images[JetVar(0, 1)] == X1 + Y1 + X1 * Y + X * Y1

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_ga_any_level(self, n):
        jc = ga(6).jet_comul(n)
        R = jc.ring
        for i in range(n + 1):
            assert jc.images[JetVar(0, i)] == R.var(0, i, Side.LEFT) + R.var(0, i, Side.RIGHT)

    def test_legendre_coefficient_derivatives(self):
        # the t in the cubic coefficient is differentiated: 1 * (X^2 Y + X Y^2) enters d^2 x
        G = legendre6()
        jc = G.jet_comul(2)
        R = jc.ring
        assert jc.images[JetVar(0, 2)].coefficient({JetVar(0, 0, Side.LEFT): 2, JetVar(0, 0, Side.RIGHT): 1}) == ZERO
        X1 = JetVar(0, 1, Side.LEFT)
        c = jc.images[JetVar(0, 1)].coefficient({JetVar(0, 0, Side.LEFT): 2, JetVar(0, 0, Side.RIGHT): 1})
        assert c == ONE
        assert jc.images[JetVar(0, 2)].coefficient({X1: 1, JetVar(0, 0, Side.LEFT): 1, JetVar(0, 0, Side.RIGHT): 1}) == 4 * ONE

    def test_prolongation_square(self):
        rng = random.Random(5)
        for _ in range(30):
            assert prolongation_square_case(rng) is True

    def test_cache_is_shared(self):
        G = gm(6)
        assert G.jet_comul(2) is G.jet_comul(2)
        with pytest.raises(ValueError):
            G.jet_comul(-1)


class TestNn:
    @pytest.mark.parametrize("name, n", [("ga", 3), ("gm", 2), ("gm", 3), ("ga*gm", 2), ("ga^2*gm", 2)])
    def test_exact_groups(self, name, n):
        assert check_Nn_additive(catalog(name, 6), n)

    def test_legendre(self):
        assert check_Nn_additive(legendre6(), 2)

    def test_literal_coordinates(self):
        # raw coordinates are additive on N^n G_a but not on N^2 G_m
        assert nn_coordinates_primitive(ga(6), 3)
        assert nn_coordinates_primitive(gm(6), 1)
        assert not nn_coordinates_primitive(gm(6), 2)

    def test_gm_restricted_law(self):
        NG = restricted_N_law(gm(6), 2)
        R = NG.comul[0].ring
        A, B = R.var(0, 0, Side.LEFT), R.var(0, 0, Side.RIGHT)
        A2, B2 = R.var(1, 0, Side.LEFT), R.var(1, 0, Side.RIGHT)
        assert NG.comul[0] == A + B
        assert NG.comul[1] == A2 + B2 + (A * B).scale(2)
        # polynomial logarithm: (x', x'' - x'^2)
        logs = formal_log(NG)
        x1, x2 = logs[0].ring.var(0), logs[0].ring.var(1)
        assert logs == [x1, x2 - x1 * x1]

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_top_order_linear(self, n):
        for G in (ga(6), gm(6), legendre6()):
            assert h_linearity(G, n)
