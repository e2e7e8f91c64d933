"""Picard-Fuchs operator of the Legendre family by reduction in algebraic de Rham cohomology.

Forms are R(u) dx/y on y^2 = x(x-1)(x-lam) with u = x - lam and R a Laurent polynomial in u
(stored as ``{power: RatFunc}``).  H^1 is spanned by dx/y and u dx/y; everything else is
reduced with the exact forms d(u^j y).  This module shares no code with the character solver.
"""
from __future__ import annotations

from .basefield import DEFAULT_FIELD, ONE, ZERO, FieldConfig, RatFunc, T, derive, nullspace

Laurent = dict  # power -> RatFunc

HALF = RatFunc(1) / 2


def _add_into(acc: Laurent, k: int, c: RatFunc) -> None:
    v = acc.get(k, ZERO) + c
    if v:
        acc[k] = v
    else:
        acc.pop(k, None)


def gauss_manin(R: Laurent, lam: RatFunc, field: FieldConfig = DEFAULT_FIELD) -> Laurent:
    """d/dt of R(u) dx/y at fixed x: R -> dR/dt|_u - lam' dR/du + lam' R / (2u)."""
    dl = derive(lam, field)
    out: Laurent = {}
    for k, c in R.items():
        _add_into(out, k, derive(c, field))
        if dl:
            if k:
                _add_into(out, k - 1, -dl * c * k)
            _add_into(out, k - 1, dl * c * HALF)
    return out


def exact_form(j: int, lam: RatFunc) -> Laurent:
    """d(u^j y) / (dx/y) = u^j ((j + 3/2) u^2 + (j + 1)(2 lam - 1) u + (j + 1/2) lam (lam - 1))."""
    out: Laurent = {}
    _add_into(out, j + 2, RatFunc(2 * j + 3) / 2)
    _add_into(out, j + 1, (2 * lam - 1) * (j + 1))
    _add_into(out, j, lam * (lam - 1) * (RatFunc(2 * j + 1) / 2))
    return out


def reduce_form(R: Laurent, lam: RatFunc) -> tuple[RatFunc, RatFunc]:
    """Cohomology class of R(u) dx/y in the basis (dx/y, u dx/y)."""
    R = dict(R)
    while True:
        high = [k for k in R if k >= 2]
        low = [k for k in R if k < 0]
        if high:
            k = max(high)
            E = exact_form(k - 2, lam)
            f = R[k] / E[k]
        elif low:
            k = min(low)
            E = exact_form(k, lam)
            f = R[k] / E[k]
        else:
            return R.get(0, ZERO), R.get(1, ZERO)
        for p, c in E.items():
            _add_into(R, p, -f * c)


def picard_fuchs(lam=None, field: FieldConfig = DEFAULT_FIELD) -> list[RatFunc]:
    """Coefficients (c0, c1, c2) with c0 w + c1 w' + c2 w'' exact for w = dx/y, normalized c2 = 1."""
    lam = T if lam is None else lam
    forms = [{0: ONE}]
    for _ in range(2):
        forms.append(gauss_manin(forms[-1], lam, field))
    classes = [reduce_form(f, lam) for f in forms]
    M = [[cls[0] for cls in classes], [cls[1] for cls in classes]]
    ker = nullspace(M, 3)
    if len(ker) != 1:
        # constant lam: w' is already exact, first-order relation
        ker1 = nullspace([[classes[0][0], classes[1][0]], [classes[0][1], classes[1][1]]], 2)
        if not ker1:
            raise ArithmeticError("no Picard-Fuchs relation of order <= 2")
        v = ker1[0] + [ZERO]
        return [c / v[1] for c in v] if v[1] else v
    v = ker[0]
    return [c / v[2] for c in v]
