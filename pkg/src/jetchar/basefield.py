"""Exact arithmetic in the differential field Q(t) and linear algebra over it.

Polynomials in ``t`` are python-flint ``fmpq_poly`` objects; a :class:`RatFunc`
is a reduced quotient of two of them with a monic denominator, so equality of
field elements is a structural comparison.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from flint import fmpq, fmpq_poly

Rational = fmpq
UniPoly = fmpq_poly

_ONE_POLY = fmpq_poly([1])
_ZERO_POLY = fmpq_poly([])


def _to_fmpq(value) -> fmpq:
    if isinstance(value, fmpq):
        return value
    if isinstance(value, Fraction):
        return fmpq(value.numerator, value.denominator)
    return fmpq(value)


class RatFunc:
    """Element ``num/den`` of Q(t) in canonical form.

    Canonical form: ``gcd(num, den) = 1`` and ``den`` monic; zero is ``0/1``.
    Instances are immutable.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num=0, den=None, *, _reduced: bool = False):
        if not isinstance(num, fmpq_poly):
            num = fmpq_poly([_to_fmpq(num)]) if num != 0 else fmpq_poly([])
        if den is None:
            self.num, self.den = num, _ONE_POLY
            self._hash = None
            return
        if not isinstance(den, fmpq_poly):
            den = fmpq_poly([_to_fmpq(den)])
        if den.is_zero():
            raise ZeroDivisionError("RatFunc with zero denominator")
        if not _reduced:
            if num.is_zero():
                den = _ONE_POLY
            else:
                g = num.gcd(den)
                if not g.is_one():
                    num = num // g
                    den = den // g
                lc = den.leading_coefficient()
                if lc != 1:
                    num = num / lc
                    den = den / lc
        self.num, self.den = num, den
        self._hash = None

    # construction helpers -------------------------------------------------
    @classmethod
    def t(cls) -> "RatFunc":
        return cls(fmpq_poly([0, 1]))

    @classmethod
    def const(cls, value) -> "RatFunc":
        return cls(value)

    @classmethod
    def from_poly(cls, coeffs: Sequence) -> "RatFunc":
        return cls(fmpq_poly([_to_fmpq(c) for c in coeffs]))

    # predicates ------------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num.is_one() and self.den.is_one()

    def is_constant(self) -> bool:
        return self.den.is_one() and self.num.degree() <= 0

    def is_polynomial(self) -> bool:
        return self.den.is_one()

    def constant_value(self) -> fmpq:
        if not self.is_constant():
            raise ValueError(f"{self} is not a constant")
        return self.num[0] if not self.num.is_zero() else fmpq(0)

    def total_degree(self) -> int:
        """Pivot-size heuristic: deg(num) + deg(den)."""
        return max(self.num.degree(), 0) + self.den.degree()

    # arithmetic --------------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, RatFunc):
            other = _coerce(other)
            if other is NotImplemented:
                return NotImplemented
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        if self.den.is_one() and other.den.is_one():
            return RatFunc(self.num + other.num, _ONE_POLY, _reduced=True)
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        g = self.den.gcd(other.den)
        if g.is_one():
            return RatFunc(self.num * other.den + other.num * self.den,
                           self.den * other.den, _reduced=True)
        d1 = self.den // g
        d2 = other.den // g
        return RatFunc(self.num * d2 + other.num * d1, self.den * d2)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, _reduced=True)

    def __sub__(self, other):
        if not isinstance(other, RatFunc):
            other = _coerce(other)
            if other is NotImplemented:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, RatFunc):
            other = _coerce(other)
            if other is NotImplemented:
                return NotImplemented
        if self.num.is_zero() or other.num.is_zero():
            return ZERO
        if self.den.is_one() and other.den.is_one():
            return RatFunc(self.num * other.num, _ONE_POLY, _reduced=True)
        g1 = self.num.gcd(other.den)
        g2 = other.num.gcd(self.den)
        n1, d2 = (self.num, other.den) if g1.is_one() else (self.num // g1, other.den // g1)
        n2, d1 = (other.num, self.den) if g2.is_one() else (other.num // g2, self.den // g2)
        return RatFunc(n1 * n2, d1 * d2, _reduced=True)

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if self.num.is_zero():
            raise ZeroDivisionError("division by zero in Q(t)")
        return RatFunc(self.den, self.num)

    def __truediv__(self, other):
        if not isinstance(other, RatFunc):
            other = _coerce(other)
            if other is NotImplemented:
                return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return _coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        return RatFunc(self.num ** k, self.den ** k, _reduced=True)

    # comparison --------------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, RatFunc):
            other = _coerce(other)
            if other is NotImplemented:
                return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((tuple(self.num.coeffs()), tuple(self.den.coeffs())))
        return self._hash

    def __bool__(self):
        return not self.num.is_zero()

    # evaluation --------------------------------------------------------------
    def __call__(self, t0) -> fmpq:
        t0 = _to_fmpq(t0)
        d = self.den(t0)
        if d == 0:
            raise ZeroDivisionError(f"pole at t = {t0}")
        return self.num(t0) / d

    def has_pole_at(self, t0) -> bool:
        return self.den(_to_fmpq(t0)) == 0

    # rendering ---------------------------------------------------------------
    def __str__(self):
        return format_ratfunc(self)

    def __repr__(self):
        return f"RatFunc({format_ratfunc(self)!r})"


def _coerce(value):
    if isinstance(value, RatFunc):
        return value
    if isinstance(value, (int, fmpq, Fraction)):
        return RatFunc(_to_fmpq(value))
    if isinstance(value, fmpq_poly):
        return RatFunc(value)
    return NotImplemented


ZERO = RatFunc(0)
ONE = RatFunc(1)
T = RatFunc.t()


def as_ratfunc(value) -> RatFunc:
    out = _coerce(value)
    if out is NotImplemented:
        raise TypeError(f"cannot interpret {value!r} as an element of Q(t)")
    return out


def format_poly(p: fmpq_poly) -> str:
    """Render a polynomial in t with integer/rational coefficients, highest power first."""
    coeffs = p.coeffs()
    if not coeffs:
        return "0"
    terms = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        a = -c if c < 0 else c
        if k == 0:
            body = str(a)
        else:
            mono = "t" if k == 1 else f"t^{k}"
            body = mono if a == 1 else f"{a}*{mono}"
        terms.append((sign, body))
    first_sign, first = terms[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


def format_ratfunc(r: RatFunc) -> str:
    """Canonical ``num/den`` text; the denominator is omitted when it is 1."""
    n = format_poly(r.num)
    if r.den.is_one():
        return n
    d = format_poly(r.den)
    if len([c for c in r.num.coeffs() if c != 0]) > 1 or "/" in n:
        n = f"({n})"
    if len([c for c in r.den.coeffs() if c != 0]) > 1:
        d = f"({d})"
    return f"{n}/{d}"


# ---------------------------------------------------------------------------
# the derivation


@dataclass(frozen=True)
class FieldConfig:
    """The differential field: Q(t) with ``derive(t) = dt``, or Q with the zero derivation."""

    mode: str = "rational-functions-in-t"
    dt: RatFunc = ONE

    def __post_init__(self):
        if self.mode not in ("rational-functions-in-t", "constants-only"):
            raise ValueError(f"unknown field mode {self.mode!r}")

    @property
    def trivial(self) -> bool:
        return self.mode == "constants-only" or self.dt.is_zero()


DEFAULT_FIELD = FieldConfig()
CONSTANT_FIELD = FieldConfig(mode="constants-only", dt=ZERO)


def derive(r: RatFunc, field: FieldConfig = DEFAULT_FIELD) -> RatFunc:
    if field.trivial or r.is_constant():
        return ZERO
    n, d = r.num, r.den
    if d.is_one():
        out = RatFunc(n.derivative(), _ONE_POLY, _reduced=True)
    else:
        out = RatFunc(n.derivative() * d - n * d.derivative(), d * d)
    if field.dt.is_one():
        return out
    return out * field.dt


# ---------------------------------------------------------------------------
# linear algebra over Q(t)


def _clear_row(row: Sequence[RatFunc]) -> list[fmpq_poly]:
    """Scale a row by the lcm of its denominators, returning primitive polynomial entries."""
    lcm = _ONE_POLY
    for x in row:
        if not x.den.is_one():
            g = lcm.gcd(x.den)
            lcm = lcm * (x.den // g)
    out = [x.num * (lcm // x.den) if not x.num.is_zero() else _ZERO_POLY for x in row]
    return _primitive(out)


def _primitive(row: list[fmpq_poly]) -> list[fmpq_poly]:
    g = None
    for p in row:
        if p.is_zero():
            continue
        g = p if g is None else g.gcd(p)
        if g.is_one():
            break
    if g is None:
        return row
    if not g.is_one():
        row = [p // g if not p.is_zero() else p for p in row]
    # fix scale: make the first nonzero entry have leading coefficient 1
    for p in row:
        if not p.is_zero():
            lc = p.leading_coefficient()
            if lc != 1:
                row = [q / lc for q in row]
            break
    return row


def _echelon(rows: list[list[fmpq_poly]], ncols: int) -> tuple[list[list[fmpq_poly]], list[int]]:
    """Fraction-free row echelon form over Q[t] with minimal-degree pivots.

    Returns the pivot rows (primitive) and their pivot columns in increasing order.
    """
    work = [r for r in rows if any(not p.is_zero() for p in r)]
    pivots: list[int] = []
    done: list[list[fmpq_poly]] = []
    col = 0
    while work and col < ncols:
        best = None
        for idx, r in enumerate(work):
            p = r[col]
            if p.is_zero():
                continue
            key = (p.degree(), sum(max(q.degree(), 0) for q in r))
            if best is None or key < best[0]:
                best = (key, idx)
        if best is None:
            col += 1
            continue
        prow = work.pop(best[1])
        piv = prow[col]
        new_work = []
        for r in work:
            q = r[col]
            if q.is_zero():
                new_work.append(r)
                continue
            g = piv.gcd(q)
            a = piv // g
            b = q // g
            nr = [a * r[j] - b * prow[j] if j > col else _ZERO_POLY for j in range(ncols)]
            nr[:col + 1] = [_ZERO_POLY] * (col + 1)
            if any(not p.is_zero() for p in nr):
                new_work.append(_primitive(nr))
        work = new_work
        done.append(prow)
        pivots.append(col)
        col += 1
    return done, pivots


def _as_rows(M: Sequence[Sequence]) -> list[list[RatFunc]]:
    return [[as_ratfunc(x) for x in row] for row in M]


def rank(M: Sequence[Sequence]) -> int:
    """Rank over Q(t) of a matrix given as a list of rows."""
    rows = _as_rows(M)
    if not rows:
        return 0
    ncols = len(rows[0])
    _, piv = _echelon([_clear_row(r) for r in rows], ncols)
    return len(piv)


def rref(M: Sequence[Sequence]) -> tuple[list[list[RatFunc]], list[int]]:
    """Reduced row echelon form over Q(t): pivot entries 1, zeros above and below."""
    rows = _as_rows(M)
    if not rows:
        return [], []
    ncols = len(rows[0])
    ech, piv = _echelon([_clear_row(r) for r in rows], ncols)
    R = [[RatFunc(p) for p in r] for r in ech]
    for i in range(len(R) - 1, -1, -1):
        c = piv[i]
        inv = R[i][c].inverse()
        R[i] = [x * inv if x else x for x in R[i]]
        for k in range(i):
            f = R[k][c]
            if f:
                R[k] = [a - f * b if b else a for a, b in zip(R[k], R[i])]
    return R, piv


def nullspace(M: Sequence[Sequence], ncols: int | None = None) -> list[list[RatFunc]]:
    """Basis of {v : M v = 0}; each vector's first nonzero entry is 1.

    ``ncols`` is required when ``M`` has no rows.
    """
    rows = _as_rows(M)
    if ncols is None:
        if not rows:
            raise ValueError("ncols required for an empty matrix")
        ncols = len(rows[0])
    R, piv = rref(rows) if rows else ([], [])
    pivset = set(piv)
    basis = []
    for free in range(ncols):
        if free in pivset:
            continue
        v = [ZERO] * ncols
        v[free] = ONE
        for i, c in enumerate(piv):
            if R[i][free]:
                v[c] = -R[i][free]
        lead = next(x for x in v if x)
        if not lead.is_one():
            inv = lead.inverse()
            v = [x * inv for x in v]
        basis.append(v)
    # echelon-normalize the basis itself (first nonzero of each vector is 1, distinct leads)
    return echelon_basis(basis)


def echelon_basis(vectors: Sequence[Sequence]) -> list[list[RatFunc]]:
    """Reduced echelon basis of the span of ``vectors`` (rows with leading 1)."""
    if not vectors:
        return []
    R, _ = rref(vectors)
    return R


def mat_vec(M: Sequence[Sequence[RatFunc]], v: Sequence[RatFunc]) -> list[RatFunc]:
    out = []
    for row in M:
        acc = ZERO
        for a, b in zip(row, v):
            if a and b:
                acc = acc + a * b
        out.append(acc)
    return out


def evaluate_matrix(M: Sequence[Sequence[RatFunc]], t0) -> list[list[fmpq]]:
    return [[as_ratfunc(x)(t0) for x in row] for row in M]


def rank_over_q(M: Sequence[Sequence]) -> int:
    """Rank of a rational matrix (used by evaluation oracles)."""
    from flint import fmpq_mat
    if not M or not M[0]:
        return 0
    return fmpq_mat([[_to_fmpq(x) for x in row] for row in M]).rank()


def random_ratfunc(rng: random.Random, max_deg: int = 2, coeff: int = 5,
                   allow_den: bool = True) -> RatFunc:
    """Random element of Q(t) with small integer data (test and verify helper)."""
    def poly(deg):
        return fmpq_poly([rng.randint(-coeff, coeff) for _ in range(deg + 1)])
    num = poly(rng.randint(0, max_deg))
    if not allow_den:
        return RatFunc(num)
    den = poly(rng.randint(0, max_deg))
    while den.is_zero():
        den = poly(rng.randint(0, max_deg))
    return RatFunc(num, den)


def non_pole(values: Iterable[RatFunc], rng: random.Random, lo: int = -50, hi: int = 50) -> fmpq:
    """A rational t0 at which none of ``values`` has a pole."""
    values = list(values)
    while True:
        t0 = fmpq(rng.randint(lo, hi), rng.randint(1, 9))
        if not any(v.has_pole_at(t0) for v in values):
            return t0
