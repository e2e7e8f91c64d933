from flint import fmpq

from jetchar.basefield import ONE, ZERO, RatFunc, T
from jetchar.picard_fuchs import exact_form, gauss_manin, picard_fuchs, reduce_form


def test_legendre_operator():
    c0, c1, c2 = picard_fuchs()
    assert c2 == ONE
    assert c1 == (1 - 2 * T) / (T * (1 - T))
    assert c0 == -1 / (4 * T * (1 - T))


def test_hypergeometric_period_satisfies_operator():
    # independent check: 2F1(1/2, 1/2; 1; t) = sum ((1/2)_k / k!)^2 t^k is a period
    n = 12
    a = [fmpq(1)]
    for k in range(1, n):
        a.append(a[-1] * fmpq(2 * k - 1, 2 * k) ** 2)
    c0, c1, _ = picard_fuchs()
    # t(1-t) w'' + (1-2t) w' - w/4 = 0 coefficientwise below degree n - 2
    for k in range(n - 2):
        lhs = (k + 1) * k * a[k + 1] - k * (k - 1) * a[k] + (k + 1) * a[k + 1] - 2 * k * a[k] - a[k] / 4
        assert lhs == 0
    # and the computed operator is that one, scaled by 1/(t(1-t))
    assert c1 * T * (1 - T) == 1 - 2 * T
    assert c0 * T * (1 - T) == RatFunc(fmpq(-1, 4))


def test_exact_forms_reduce_to_zero():
    for j in range(-2, 4):
        assert reduce_form(exact_form(j, T), T) == (ZERO, ZERO)


def test_constant_lambda_has_no_connection_term():
    lam = RatFunc(3)
    assert gauss_manin({0: ONE}, lam) == {}


def test_other_lambda():
    # lam = t^2: the pullback of the operator along t -> t^2
    c0, c1, c2 = picard_fuchs(T ** 2)
    assert c2 == ONE
    assert c1 and c0
