"""Prolonged ideals of affine schemes and the D_n(K) functor-of-points oracle.

A jet of order n is an assignment of values in K to every d^i x_j, i <= n.  Dictionary with
points of X over D_n(K) = K[e]/(e^(n+1)): x_j -> sum_i value(d^i x_j)/i! e^i, while K acts on
D_n(K) through the Hasse-Schmidt map exp_d.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from .basefield import (DEFAULT_FIELD, ONE, ZERO, FieldConfig, RatFunc, as_ratfunc, derive,
                        random_ratfunc, rref)
from .diffring import DiffPoly, JetRing, JetVar, total_derive


class OracleMismatch(AssertionError):
    """The two membership tests disagree: an implementation bug."""


@dataclass
class AffineScheme:
    vars: list
    relations: list            # DiffPoly of order 0
    field: FieldConfig = DEFAULT_FIELD

    def __post_init__(self):
        for f in self.relations:
            if f.max_order() > 0:
                raise ValueError("relations may only involve order-0 variables")

    @property
    def g(self) -> int:
        return len(self.vars)

    def ring(self, n: int) -> JetRing:
        return JetRing(self.g, n, None, False, self.field, tuple(self.vars))


@dataclass
class JetIdeal:
    level: int
    generators: list           # generators[k][s] = d^s f_k

    def flat(self) -> list[DiffPoly]:
        return [p for gens in self.generators for p in gens]


def legendre_curve(lam=None, field: FieldConfig = DEFAULT_FIELD) -> AffineScheme:
    """The affine curve y^2 = x(x-1)(x-lam) in variables (x, y)."""
    lam = RatFunc.t() if lam is None else as_ratfunc(lam)
    R = JetRing(2, 0, None, False, field, ("x", "y"))
    x, y = R.var(0), R.var(1)
    return AffineScheme(["x", "y"], [y * y - x * (x - 1) * (x - lam)], field)


def prolong_ideal(X: AffineScheme, n: int) -> JetIdeal:
    """All d^s f_k, 0 <= s <= n."""
    if n < 0:
        raise ValueError("n must be >= 0")
    ring = X.ring(n)
    gens = []
    for f in X.relations:
        chain = [f.in_ring(ring)]
        for _ in range(n):
            chain.append(total_derive(chain[-1]))
        gens.append(chain)
    return JetIdeal(n, gens)


# ---------------------------------------------------------------------------
# D_n(K)


@dataclass(frozen=True)
class TruncatedElement:
    """sum_i coeffs[i] e^i in K[e]/(e^(n+1))."""

    coeffs: tuple

    @classmethod
    def of(cls, coeffs: Sequence) -> "TruncatedElement":
        return cls(tuple(as_ratfunc(c) for c in coeffs))

    @property
    def n(self) -> int:
        return len(self.coeffs) - 1

    def __add__(self, other: "TruncatedElement") -> "TruncatedElement":
        return TruncatedElement(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "TruncatedElement") -> "TruncatedElement":
        return TruncatedElement(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __mul__(self, other: "TruncatedElement") -> "TruncatedElement":
        n = self.n
        out = [ZERO] * (n + 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j in range(n + 1 - i):
                    b = other.coeffs[j]
                    if b:
                        out[i + j] = out[i + j] + a * b
        return TruncatedElement(tuple(out))

    def truncate(self, n: int) -> "TruncatedElement":
        """The projection T: D_(n+k) -> D_n."""
        return TruncatedElement(self.coeffs[: n + 1])

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    @classmethod
    def one(cls, n: int) -> "TruncatedElement":
        return cls((ONE,) + (ZERO,) * n)


def exp_del(r, n: int, field: FieldConfig = DEFAULT_FIELD) -> TruncatedElement:
    """exp_d(r) = sum_i d^i(r)/i! e^i."""
    if n < 0:
        raise ValueError("n must be >= 0")
    r = as_ratfunc(r)
    out = []
    d = r
    for i in range(n + 1):
        out.append(d / math.factorial(i))
        d = derive(d, field)
    return TruncatedElement(tuple(out))


def eval_truncated(f: DiffPoly, point: Mapping[int, TruncatedElement], n: int) -> TruncatedElement:
    """f in D_n(K) with x_j -> point[j] and coefficients acting through exp_d."""
    ring = f.ring
    if f.max_order() > 0:
        raise ValueError("eval_truncated needs an order-0 polynomial")
    acc = TruncatedElement((ZERO,) * (n + 1))
    for m, c in f.terms.items():
        term = exp_del(c, n, ring.field)
        for s, e in ring.exponents(m):
            gen = ring.slot_var(s).gen
            if gen not in point:
                raise KeyError(f"no value for {ring.names[gen]}")
            for _ in range(e):
                term = term * point[gen]
        acc = acc + term
    return acc


def evaluate(p: DiffPoly, values: Mapping[JetVar, RatFunc]) -> RatFunc:
    """Value of a jet polynomial at an assignment of its variables."""
    ring = p.ring
    acc = ZERO
    for m, c in p.terms.items():
        term = c
        for s, e in ring.exponents(m):
            v = ring.slot_var(s)
            term = term * values[JetVar(v.gen, v.order)] ** e
        acc = acc + term
    return acc


def jet_to_point(values: Mapping[JetVar, RatFunc], g: int, n: int) -> dict[int, TruncatedElement]:
    return {j: TruncatedElement(tuple(as_ratfunc(values[JetVar(j, i)]) / math.factorial(i)
                                      for i in range(n + 1)))
            for j in range(g)}


def jet_point_oracle(X: AffineScheme, n: int, values: Mapping[JetVar, RatFunc]) -> bool:
    """Membership of a jet by prolonged-ideal vanishing and by evaluation in D_n(K); both must agree."""
    missing = [(j, i) for j in range(X.g) for i in range(n + 1) if JetVar(j, i) not in values]
    if missing:
        raise KeyError(f"jet values missing for {missing}")
    ideal = prolong_ideal(X, n)
    path1 = all(not evaluate(p, values) for p in ideal.flat())
    point = jet_to_point(values, X.g, n)
    path2 = all(eval_truncated(f, point, n).is_zero() for f in X.relations)
    if path1 != path2:
        raise OracleMismatch(f"prolonged ideal says {path1}, D_n evaluation says {path2}")
    return path1


# ---------------------------------------------------------------------------
# valid and invalid jets


def solve_jet(X: AffineScheme, n: int, base: Mapping[int, RatFunc], rng: random.Random,
              max_deg: int = 1) -> tuple[dict[JetVar, RatFunc], list[JetVar]]:
    """Extend a K-point to an order-n jet level by level.

    At level s >= 1 the generators d^s f_k are affine-linear in the order-s variables with the
    Jacobian of X as coefficient matrix; free variables get random values and pivot variables
    are solved for.  Returns the jet and the list of solved (pivot) variables.
    """
    values = {JetVar(j, 0): as_ratfunc(base[j]) for j in range(X.g)}
    for f in X.relations:
        if evaluate(f, values):
            raise ValueError("base point is not on the scheme")
    ideal = prolong_ideal(X, n)
    pivots: list[JetVar] = []
    for s in range(1, n + 1):
        order_s = [JetVar(j, s) for j in range(X.g)]
        rows = []
        for gens in ideal.generators:
            p = gens[s]
            zero_s = dict(values)
            zero_s.update({v: ZERO for v in order_s})
            rest = evaluate(p, zero_s)
            coeffs = []
            for v in order_s:
                probe = dict(zero_s)
                probe[v] = ONE
                coeffs.append(evaluate(p, probe) - rest)
            rows.append(coeffs + [-rest])
        R, piv = rref(rows)
        if X.g in piv:
            raise ValueError(f"level {s} system is inconsistent (singular point)")
        free = [k for k in range(X.g) if k not in piv]
        chosen = {k: random_ratfunc(rng, max_deg, 4) for k in free}
        for r_idx, k in enumerate(piv):
            row = R[r_idx]
            val = row[X.g]
            for f_ in free:
                val = val - row[f_] * chosen[f_]
            chosen[k] = val
            pivots.append(order_s[k])
        for k in range(X.g):
            values[order_s[k]] = chosen[k]
    return values, pivots


def perturb_jet(values: Mapping[JetVar, RatFunc], pivots: Sequence[JetVar],
                rng: random.Random) -> dict[JetVar, RatFunc]:
    """Change one solved coordinate; its level equation then fails because its coefficient is nonzero."""
    out = dict(values)
    v = rng.choice(list(pivots))
    while True:
        delta = random_ratfunc(rng, 1, 4)
        if delta:
            break
    out[v] = out[v] + delta
    return out


def legendre_base_points(lam=None) -> list[dict[int, RatFunc]]:
    """The K-rational affine 2-torsion points (e, 0), e in {0, 1, lam}."""
    lam = RatFunc.t() if lam is None else as_ratfunc(lam)
    return [{0: ZERO, 1: ZERO}, {0: ONE, 1: ZERO}, {0: lam, 1: ZERO}]
