import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jetchar.basefield import ONE, ZERO, T, random_ratfunc
from jetchar.diffring import JetRing, JetVar
from jetchar.hasse import (AffineScheme, TruncatedElement, eval_truncated, exp_del,
                           jet_point_oracle, legendre_base_points, legendre_curve, perturb_jet,
                           prolong_ideal, solve_jet)
from jetchar.verify import legendre_jet_case


def line_scheme(rel):
    R = JetRing(1, 0, None, names=("x",))
    return AffineScheme(["x"], [rel(R.var(0))])


class TestProlong:
    def test_legendre_level1(self):
        X = legendre_curve()
        (chain,) = prolong_ideal(X, 1).generators
        R = chain[1].ring
        x, y, x1, y1 = R.var(0), R.var(1), R.var(0, 1), R.var(1, 1)
        one = R.one()
        expect = (y * y1).scale(2) - x1 * (x - one) * (x - T) - x * x1 * (x - T) - x * (x - one) * (x1 - one)
        assert chain[1] == expect

    def test_linear(self):
        X = line_scheme(lambda x: x)
        (chain,) = prolong_ideal(X, 2).generators
        R = chain[0].ring
        assert chain == [R.var(0), R.var(0, 1), R.var(0, 2)]

    def test_empty(self):
        X = AffineScheme(["x"], [])
        assert prolong_ideal(X, 3).flat() == []

    def test_order_zero_relations_only(self):
        R = JetRing(1, 1, None)
        with pytest.raises(ValueError):
            AffineScheme(["x"], [R.var(0, 1)])


class TestExpDel:
    def test_t(self):
        assert exp_del(T, 2) == TruncatedElement.of([T, 1, 0])

    def test_t_squared(self):
        assert exp_del(T ** 2, 2) == TruncatedElement.of([T ** 2, 2 * T, 1])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(0, 4))
    def test_ring_map(self, seed, n):
        rng = random.Random(seed)
        a, b = random_ratfunc(rng, 2, 5), random_ratfunc(rng, 2, 5)
        assert exp_del(a * b, n) == exp_del(a, n) * exp_del(b, n)
        assert exp_del(a + b, n) == exp_del(a, n) + exp_del(b, n)
        assert exp_del(a, n + 1).truncate(n) == exp_del(a, n)


class TestEvalTruncated:
    def test_identity(self):
        X = line_scheme(lambda x: x)
        pt = TruncatedElement.of([T, 3])
        assert eval_truncated(X.relations[0], {0: pt}, 1) == pt

    def test_twisted_action(self):
        X = line_scheme(lambda x: x.scale(T))
        out = eval_truncated(X.relations[0], {0: TruncatedElement.of([1, 0])}, 1)
        assert out == TruncatedElement.of([T, 1])

    def test_square_root_jet(self):
        # x^2 - t^2 has the K-root x = t; the solved jet has x' = 1, x'' = 0
        X = line_scheme(lambda x: x * x - T ** 2)
        vals, piv = solve_jet(X, 2, {0: T}, random.Random(0))
        assert vals[JetVar(0, 1)] == ONE and vals[JetVar(0, 2)] == ZERO
        pt = TruncatedElement.of([vals[JetVar(0, i)] / f for i, f in enumerate((1, 1, 2))])
        assert eval_truncated(X.relations[0], {0: pt}, 2).is_zero()


class TestOracle:
    def test_linear_zero(self):
        X = line_scheme(lambda x: x)
        assert jet_point_oracle(X, 2, {JetVar(0, i): ZERO for i in range(3)})

    def test_legendre_at_lambda(self):
        X = legendre_curve()
        vals, piv = solve_jet(X, 2, {0: T, 1: ZERO}, random.Random(1))
        assert jet_point_oracle(X, 2, vals) is True
        assert jet_point_oracle(X, 2, perturb_jet(vals, piv, random.Random(2))) is False

    def test_missing_values(self):
        with pytest.raises(KeyError):
            jet_point_oracle(legendre_curve(), 1, {JetVar(0, 0): ZERO})

    def test_base_point_off_curve(self):
        with pytest.raises(ValueError):
            solve_jet(legendre_curve(), 1, {0: T, 1: ONE}, random.Random(0))

    def test_base_points(self):
        X = legendre_curve()
        for p in legendre_base_points():
            vals, _ = solve_jet(X, 0, p, random.Random(0))
            assert jet_point_oracle(X, 0, vals)

    def test_hundred_valid_and_invalid(self):
        rng_seeds = range(100)
        assert all(legendre_jet_case(random.Random(s)) is True for s in rng_seeds)
