from flint import fmpq

from jetchar import series as S
from jetchar.basefield import ONE, ZERO, RatFunc, T


def log1p(n):
    return [ZERO] + [RatFunc(fmpq((-1) ** (k + 1), k)) for k in range(1, n)]


def test_mul_and_inverse():
    a = [ONE, T, T ** 2, ZERO, ONE]
    inv = S.inverse(a)
    assert S.mul(a, inv) == S.monomial(0, len(a))


def test_reversion_of_log1p_is_expm1():
    n = 8
    exp_m1 = S.reversion(log1p(n))
    fact = 1
    for k in range(1, n):
        fact *= k
        assert exp_m1[k] == RatFunc(fmpq(1, fact))


def test_compose_identity():
    a = [ZERO, ONE, T, 1 / T, ZERO]
    assert S.compose(a, S.reversion(a)) == S.monomial(1, 5)


def test_integrate_inverts_d_dx():
    a = [ZERO, T, 3 * ONE, T ** 2]
    assert S.integrate(S.d_dx(a))[: len(a)] == a


def test_derive_coefficients():
    assert S.derive_coefficients([T, T ** 2]) == [ONE, 2 * T]
