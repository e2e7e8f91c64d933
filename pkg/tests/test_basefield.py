import random

import pytest
from flint import fmpq, fmpq_poly
from hypothesis import given, settings
from hypothesis import strategies as st

from jetchar import basefield as bf
from jetchar.basefield import (CONSTANT_FIELD, ONE, ZERO, RatFunc, T, derive, format_ratfunc,
                               nullspace, rank)


def rf(num, den=(1,)):
    return RatFunc(fmpq_poly(list(num)), fmpq_poly(list(den)))


small = st.lists(st.integers(-5, 5), min_size=1, max_size=4)


@st.composite
def ratfuncs(draw, nonzero=False):
    num = draw(small)
    den = draw(small.filter(lambda c: any(c)))
    r = rf(num, den)
    if nonzero and not r:
        r = ONE
    return r


class TestArithmetic:
    def test_common_denominator(self):
        a = 1 / (T - 1)
        b = 1 / (T + 1)
        assert a + b == 2 * T / (T ** 2 - 1)

    def test_inverse(self):
        assert T * (1 / T) == ONE

    def test_cancellation(self):
        q = (T ** 2 - 1) / (T - 1)
        assert q == T + 1
        assert q.is_polynomial()

    def test_division_by_zero(self):
        with pytest.raises(ZeroDivisionError):
            ONE / ZERO

    def test_denominator_is_monic(self):
        r = rf([1], [0, 2])
        assert r.den.coeffs()[-1] == 1
        assert r == RatFunc(fmpq_poly([fmpq(1, 2)]), fmpq_poly([0, 1]))

    def test_constants(self):
        assert RatFunc.const(fmpq(3, 4)).is_constant()
        assert not T.is_constant()
        assert (ZERO + 5).constant_value() == 5

    def test_evaluation_and_poles(self):
        r = 1 / (T - 2)
        assert r(3) == 1
        assert r.has_pole_at(2)
        assert not r.has_pole_at(1)


class TestDerivation:
    def test_power_rule(self):
        assert derive(T ** 2) == 2 * T

    def test_quotient_rule(self):
        assert derive(1 / (T - 1)) == -1 / (T - 1) ** 2

    def test_constant_mode(self):
        assert derive(T ** 3 + 1 / T, CONSTANT_FIELD) == ZERO

    @given(ratfuncs(), ratfuncs())
    def test_leibniz(self, a, b):
        assert derive(a * b) == derive(a) * b + a * derive(b)

    @given(ratfuncs(), ratfuncs(nonzero=True))
    def test_quotient(self, a, b):
        assert derive(a / b) == (derive(a) * b - a * derive(b)) / (b * b)


class TestFieldAxioms:
    @given(ratfuncs(), ratfuncs(), ratfuncs())
    def test_ring_axioms(self, a, b, c):
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a * b == b * a

    @given(ratfuncs(nonzero=True))
    def test_inverse(self, a):
        assert a * a.inverse() == ONE

    @given(ratfuncs(), ratfuncs())
    def test_hash_consistent(self, a, b):
        if a == b:
            assert hash(a) == hash(b)


class TestFormatting:
    @pytest.mark.parametrize("r, text", [
        (ZERO, "0"),
        (ONE, "1"),
        (T, "t"),
        (-T, "-t"),
        (T ** 2 - 4 * T + 1, "t^2 - 4*t + 1"),
        (1 / (T - 1), "1/(t - 1)"),
    ])
    def test_canonical(self, r, text):
        assert format_ratfunc(r) == text


class TestLinearAlgebra:
    def test_full_rank_has_empty_kernel(self):
        assert nullspace([[ONE, ZERO], [ZERO, ONE]], 2) == []

    def test_one_relation(self):
        (v,) = nullspace([[T, T ** 2]], 2)
        assert v == [ONE, -1 / T] or v == [-T, ONE]
        assert v[0] * T + v[1] * T ** 2 == ZERO

    def test_rank_identity_and_zero(self):
        I3 = [[ONE if i == j else ZERO for j in range(3)] for i in range(3)]
        assert rank(I3) == 3
        assert rank([[ZERO] * 3 for _ in range(3)]) == 0

    def test_vandermonde_against_evaluation(self):
        vals = [ONE, T, T ** 2]
        V = [[v ** k for k in range(3)] for v in vals]
        assert rank(V) == 3
        # independent oracle: rank over Q at rational t
        for t0 in (fmpq(2), fmpq(-3, 7), fmpq(5, 2)):
            assert bf.rank_over_q(bf.evaluate_matrix(V, t0)) == 3

    def test_random_5x8_rank5(self):
        rng = random.Random(20261016)
        M = [[bf.random_ratfunc(rng, 2, 5) for _ in range(8)] for _ in range(5)]
        assert rank(M) == 5
        ker = nullspace(M, 8)
        assert len(ker) == 3
        for v in ker:
            assert all(x == ZERO for x in bf.mat_vec(M, v))
        # three random rational t: the evaluated ranks agree with the symbolic ones
        for _ in range(3):
            t0 = bf.non_pole([x for row in M for x in row] + [x for v in ker for x in v], rng)
            assert bf.rank_over_q(bf.evaluate_matrix(M, t0)) == 5
            assert bf.rank_over_q([[x(t0) for x in v] for v in ker]) == 3

    def test_rref_pivots(self):
        M = [[ONE, T, ZERO], [T, T ** 2, ONE]]
        R, piv = bf.rref(M)
        assert piv == [0, 2]
