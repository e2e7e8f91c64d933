"""Univariate truncated power series over Q(t), stored as coefficient lists of length N."""
from __future__ import annotations

from .basefield import DEFAULT_FIELD, ONE, ZERO, FieldConfig, RatFunc, derive

Series = list  # list[RatFunc], index = power


def zeros(n: int) -> Series:
    return [ZERO] * n


def monomial(k: int, n: int, c: RatFunc = ONE) -> Series:
    s = zeros(n)
    if k < n:
        s[k] = c
    return s


def add(a: Series, b: Series) -> Series:
    return [x + y for x, y in zip(a, b)]


def sub(a: Series, b: Series) -> Series:
    return [x - y for x, y in zip(a, b)]


def scale(c, a: Series) -> Series:
    return [c * x for x in a]


def mul(a: Series, b: Series) -> Series:
    n = min(len(a), len(b))
    out = zeros(n)
    for i in range(n):
        x = a[i]
        if not x:
            continue
        for j in range(n - i):
            y = b[j]
            if y:
                out[i + j] = out[i + j] + x * y
    return out


def power(a: Series, k: int) -> Series:
    out = monomial(0, len(a))
    base = a
    while k:
        if k & 1:
            out = mul(out, base)
        k >>= 1
        if k:
            base = mul(base, base)
    return out


def inverse(a: Series) -> Series:
    """Multiplicative inverse; needs a[0] != 0."""
    if not a[0]:
        raise ZeroDivisionError("series with zero constant term is not invertible")
    n = len(a)
    out = zeros(n)
    out[0] = a[0].inverse()
    for k in range(1, n):
        s = ZERO
        for j in range(1, k + 1):
            if a[j] and out[k - j]:
                s = s + a[j] * out[k - j]
        out[k] = -s * out[0]
    return out


def d_dx(a: Series) -> Series:
    return [a[i] * i for i in range(1, len(a))] + [ZERO]


def integrate(a: Series) -> Series:
    """Antiderivative with zero constant term (drops the top coefficient)."""
    return [ZERO] + [a[i - 1] / i for i in range(1, len(a))]


def derive_coefficients(a: Series, field: FieldConfig = DEFAULT_FIELD) -> Series:
    return [derive(c, field) for c in a]


def compose(a: Series, b: Series) -> Series:
    """a(b(x)) for b with zero constant term (Horner)."""
    if b[0]:
        raise ValueError("inner series must have zero constant term")
    n = len(a)
    out = zeros(n)
    for c in reversed(a):
        out = mul(out, b)
        out[0] = out[0] + c
    return out


def reversion(a: Series) -> Series:
    """Compositional inverse of a = c1 x + ..., c1 != 0, by Newton-free fixed point."""
    n = len(a)
    if a[0] or not a[1]:
        raise ValueError("reversion needs a = c1*x + O(x^2) with c1 != 0")
    inv1 = a[1].inverse()
    # b = (x - (a(b) - a1 b)) / a1, iterated; each pass fixes one more coefficient
    b = monomial(1, n, inv1)
    higher = [ZERO, ZERO] + a[2:]
    for _ in range(n):
        nb = scale(inv1, sub(monomial(1, n), compose(higher, b)))
        if nb == b:
            break
        b = nb
    return b


def shift_down(a: Series, k: int) -> Series:
    """Divide by x^k (the first k coefficients must vanish)."""
    if any(a[:k]):
        raise ValueError("series not divisible by x^k")
    return a[k:] + zeros(k)
