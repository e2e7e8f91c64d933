"""Commutative formal group laws, their logarithms and jet comultiplication."""
from __future__ import annotations

import os
from dataclasses import dataclass, field as dc_field

from . import series as S
from .basefield import DEFAULT_FIELD, ONE, ZERO, FieldConfig, RatFunc, T, as_ratfunc
from .diffring import (DiffPoly, JetRing, JetVar, Side, partial, restrict_to_N, substitute,
                       total_derive)


def default_trunc() -> int:
    """Default truncation degree D, overridable through JETCHAR_TRUNC_DEFAULT."""
    raw = os.environ.get("JETCHAR_TRUNC_DEFAULT")
    if raw is None:
        return 8
    try:
        d = int(raw)
    except ValueError:
        raise ValueError(f"JETCHAR_TRUNC_DEFAULT must be an integer, got {raw!r}") from None
    if d < 2:
        raise ValueError("JETCHAR_TRUNC_DEFAULT must be at least 2")
    return d


class LawAxiomError(ValueError):
    """A comultiplication fails identity, commutativity or associativity."""

    def __init__(self, axiom: str, detail: str = ""):
        self.axiom = axiom
        super().__init__(f"law axiom '{axiom}' fails" + (f": {detail}" if detail else ""))


@dataclass(frozen=True)
class Legendre:
    """Marks an atomic law as the formal group of y^2 = x(x-1)(x-lam)."""

    lam: RatFunc


@dataclass(eq=False)
class FormalGroupLaw:
    """A g-dimensional commutative formal group law with identity at the origin.

    ``comul[i]`` is F_i(x (x) 1, 1 (x) x) in the order-0 tensor ring truncated at D.
    ``factors`` lists ``(offset, law)`` for a block-diagonal product; it is empty for an
    atomic law, whose ``model`` is ``"rational"`` (an honest polynomial law) or a
    :class:`Legendre` marker.
    """

    name: str
    g: int
    comul: tuple[DiffPoly, ...]
    trunc: int
    exact: bool
    field: FieldConfig = DEFAULT_FIELD
    declared_r: int | None = None
    names: tuple[str, ...] | None = None
    factors: tuple[tuple[int, "FormalGroupLaw"], ...] = ()
    model: object = "rational"
    _jets: dict = dc_field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.names is None:
            self.names = tuple(f"x{j}" for j in range(self.g))

    # rings ------------------------------------------------------------------
    def single_ring(self, n: int, trunc: int | None = -1) -> JetRing:
        return JetRing(self.g, n, self.trunc if trunc == -1 else trunc, False, self.field, self.names)

    def tensor_ring(self, n: int, trunc: int | None = -1) -> JetRing:
        return JetRing(self.g, n, self.trunc if trunc == -1 else trunc, True, self.field, self.names)

    def blocks(self) -> list[tuple[int, "FormalGroupLaw"]]:
        """Atomic factors with their generator offsets."""
        if not self.factors:
            return [(0, self)]
        out = []
        for off, f in self.factors:
            out.extend((off + o, a) for o, a in f.blocks())
        return out

    def with_trunc(self, D: int) -> "FormalGroupLaw":
        """The same group at another truncation degree."""
        if self.factors:
            return product([f.with_trunc(D) for _, f in self.factors], name=self.name,
                           declared_r=self.declared_r)
        if isinstance(self.model, Legendre):
            return legendre(self.model.lam, D, field=self.field)
        if self.exact and self.trunc >= max(p.total_degree() for p in self.comul):
            ring = self.tensor_ring(0, D)
            if all(p.total_degree() <= D for p in self.comul):
                return FormalGroupLaw(self.name, self.g, tuple(p.in_ring(ring) for p in self.comul),
                                      D, True, self.field, self.declared_r, self.names,
                                      model=self.model)
        raise ValueError(f"cannot re-truncate {self.name} to degree {D}")

    # jets --------------------------------------------------------------------
    def jet_comul(self, n: int) -> "JetComul":
        """images(d^i x_j) = total derivative^i of F_j, computed in the level-n tensor ring."""
        if n < 0:
            raise ValueError("n must be >= 0")
        if n in self._jets:
            return self._jets[n]
        ring = self.tensor_ring(n)
        if n == 0:
            imgs = {JetVar(j, 0): self.comul[j].in_ring(ring) for j in range(self.g)}
        else:
            prev = self.jet_comul(n - 1)
            imgs = {v: p.in_ring(ring) for v, p in prev.images.items()}
            for j in range(self.g):
                imgs[JetVar(j, n)] = total_derive(imgs[JetVar(j, n - 1)])
        jc = JetComul(n, imgs, ring)
        self._jets[n] = jc
        return jc

    def __repr__(self):
        return f"FormalGroupLaw({self.name}, g={self.g}, D={self.trunc})"


@dataclass(frozen=True)
class JetComul:
    level: int
    images: dict
    ring: JetRing


# ---------------------------------------------------------------------------
# catalog


def _tensor0(g: int, D: int, fieldcfg=DEFAULT_FIELD, names=None) -> JetRing:
    return JetRing(g, 0, D, True, fieldcfg, names)


def ga(D: int | None = None, field: FieldConfig = DEFAULT_FIELD) -> FormalGroupLaw:
    D = default_trunc() if D is None else D
    R = _tensor0(1, D, field)
    F = R.var(0, 0, Side.LEFT) + R.var(0, 0, Side.RIGHT)
    return FormalGroupLaw("ga", 1, (F,), D, True, field, declared_r=0)


def gm(D: int | None = None, field: FieldConfig = DEFAULT_FIELD) -> FormalGroupLaw:
    """G_m in the coordinate x = u - 1, so F = X + Y + XY."""
    D = default_trunc() if D is None else D
    R = _tensor0(1, D, field)
    X, Y = R.var(0, 0, Side.LEFT), R.var(0, 0, Side.RIGHT)
    return FormalGroupLaw("gm", 1, (X + Y + X * Y,), D, True, field, declared_r=0)


def shift_generators(p: DiffPoly, ring: JetRing, offset: int) -> DiffPoly:
    """Copy ``p`` into ``ring`` renaming generator j to j + offset."""
    src = p.ring
    out = {}
    for m, c in p.terms.items():
        if ring.trunc is not None and src.degree(m) > ring.trunc:
            continue
        powers = {}
        for s, e in src.exponents(m):
            v = src.slot_var(s)
            powers[JetVar(v.gen + offset, v.order, v.side)] = e
        out[ring.monomial(powers)] = c
    return DiffPoly(ring, out)


def product(laws: list[FormalGroupLaw], name: str | None = None,
            declared_r: int | None = None) -> FormalGroupLaw:
    """Block-diagonal product; the truncation is the smallest factor truncation."""
    if not laws:
        raise ValueError("product of an empty list")
    fieldcfg = laws[0].field
    if any(f.field != fieldcfg for f in laws):
        raise ValueError("factors live over different base fields")
    D = min(f.trunc for f in laws)
    g = sum(f.g for f in laws)
    R = _tensor0(g, D, fieldcfg)
    comul, factors, off = [], [], 0
    for f in laws:
        for p in f.comul:
            comul.append(shift_generators(p, R, off))
        factors.append((off, f))
        off += f.g
    if declared_r is None and all(f.declared_r is not None for f in laws):
        declared_r = sum(f.declared_r for f in laws)
    if name is None:
        name = "x".join(f.name for f in laws)
    return FormalGroupLaw(name, g, tuple(comul), D, all(f.exact for f in laws), fieldcfg,
                          declared_r, None, tuple(factors))


def check_lambda(lam) -> RatFunc:
    lam = as_ratfunc(lam)
    if lam.is_constant() and lam.constant_value() in (0, 1):
        raise ValueError("Legendre parameter must differ from 0 and 1")
    return lam


def legendre_curve_series(lam: RatFunc, N: int, field: FieldConfig = DEFAULT_FIELD):
    """w(z) and the normalized invariant differential omega(z) (so omega = 1 + ...) to length N.

    The curve is y^2 = x(x-1)(x-lam) with z = -x/y, w = -1/y, i.e.
    w = z^3 + a2 z^2 w + a4 z w^2 with a2 = -(1+lam), a4 = lam.
    """
    a2, a4 = -(ONE + lam), lam
    N0, N = N, N + 3            # dividing by z^3 costs three terms
    z = S.monomial(1, N)
    z2 = S.mul(z, z)
    z3 = S.mul(z2, z)
    w = S.zeros(N)
    for _ in range(N + 1):
        nw = S.add(z3, S.add(S.scale(a2, S.mul(z2, w)), S.scale(a4, S.mul(z, S.mul(w, w)))))
        if nw == w:
            break
        w = nw
    # omega = (z w' - w) / (2 w) ; both numerator and w start at z^3
    num = S.sub(S.mul(z, S.d_dx(w)), w)
    omega = S.scale(RatFunc(1) / 2, S.mul(S.shift_down(num, 3), S.inverse(S.shift_down(w, 3))))
    return w[:N0], omega[:N0]


def legendre_log_series(lam: RatFunc, N: int, field: FieldConfig = DEFAULT_FIELD) -> list:
    """Formal logarithm of the Legendre formal group, coefficients of z^0..z^(N-1)."""
    _, omega = legendre_curve_series(lam, N, field)
    return S.integrate(omega)


def _univariate_to_poly(coeffs: list, x: DiffPoly) -> DiffPoly:
    out = x.ring.zero()
    for c in reversed(coeffs):
        out = out * x + c
    return out


def legendre(lam=None, D: int | None = None, field: FieldConfig = DEFAULT_FIELD) -> FormalGroupLaw:
    """Formal group law of y^2 = x(x-1)(x-lam) at the origin, built as l^-1(l(X)+l(Y))."""
    D = default_trunc() if D is None else D
    lam = check_lambda(T if lam is None else lam)
    ell = legendre_log_series(lam, D + 1, field)
    inv = S.reversion(ell)
    R = _tensor0(1, D, field)
    X, Y = R.var(0, 0, Side.LEFT), R.var(0, 0, Side.RIGHT)
    s = _univariate_to_poly(ell, X) + _univariate_to_poly(ell, Y)
    F = _univariate_to_poly(inv, s)
    name = "legendre" if lam == T else f"legendre({lam})"
    return FormalGroupLaw(name, 1, (F,), D, False, field, declared_r=1, model=Legendre(lam))


def catalog(name: str, D: int | None = None, lam=None) -> FormalGroupLaw:
    """Catalog lookup: ga, gm, legendre, or a product such as ``ga*gm`` / ``ga^2*gm``."""
    key = name.strip().lower().replace(" ", "")
    parts = [p for p in key.replace("x", "*").split("*") if p] if key not in CATALOG else [key]
    if len(parts) > 1 or "^" in key:
        laws = []
        for p in parts:
            base, _, k = p.partition("^")
            laws.extend([catalog(base, D, lam)] * (int(k) if k else 1))
        return product(laws, name=name)
    if key not in CATALOG:
        raise KeyError(f"unknown group '{name}'; known: {', '.join(sorted(CATALOG))}")
    if key == "legendre":
        return legendre(lam, D)
    return CATALOG[key](D)


CATALOG = {"ga": ga, "gm": gm, "legendre": legendre}


# ---------------------------------------------------------------------------
# logarithm and axioms


def comul_in_single(G: FormalGroupLaw, ring: JetRing, left: int, right: int) -> list[DiffPoly]:
    """F(X, Y) with X, Y the generator blocks starting at ``left``/``right`` of a single ring."""
    out = []
    for p in G.comul:
        src = p.ring
        terms = {}
        for m, c in p.terms.items():
            powers = {}
            for s, e in src.exponents(m):
                v = src.slot_var(s)
                off = left if v.side == Side.LEFT else right
                powers[JetVar(v.gen + off, 0)] = e
            terms[ring.monomial(powers)] = c
        out.append(DiffPoly(ring, terms))
    return out


def invariant_matrix(G: FormalGroupLaw, prec: int) -> list[list[DiffPoly]]:
    """M_ij(x) = dF_i/dY_j (x, 0), single-side, truncated at degree ``prec``."""
    R2 = JetRing(2 * G.g, 0, None, False, G.field)
    F = comul_in_single(G, R2, 0, G.g)
    R = JetRing(G.g, 0, prec, False, G.field, G.names)
    M = []
    for i in range(G.g):
        row = []
        for j in range(G.g):
            d = partial(F[i], JetVar(G.g + j, 0))
            terms = {}
            for m, c in d.terms.items():
                exps = R2.exponents(m)
                if any(s >= G.g for s, _ in exps):
                    continue
                if R2.degree(m) > prec:
                    continue
                terms[R.monomial({JetVar(s, 0): e for s, e in exps})] = c
            row.append(DiffPoly(R, terms))
        M.append(row)
    return M


def formal_log(G: FormalGroupLaw, prec: int | None = None) -> list[DiffPoly]:
    """Logarithm l_j (l_j = x_j + O(x^2)) by integrating the invariant differentials M(x)^-1 dx.

    Exact laws may be expanded to any degree; truncated laws only to D.
    """
    prec = G.trunc if prec is None else prec
    if prec > G.trunc and not G.exact:
        raise ValueError("a truncated law determines its logarithm only up to degree D")
    g = G.g
    M = invariant_matrix(G, prec - 1) if prec > 1 else None
    R = JetRing(g, 0, max(prec - 1, 1), False, G.field, G.names)
    if M is None:
        W = [[R.one() if i == j else R.zero() for j in range(g)] for i in range(g)]
    else:
        E = [[(M[i][j] - (1 if i == j else 0)).in_ring(R) for j in range(g)] for i in range(g)]
        # (I + E)^-1 = sum (-E)^k; E has no constant term
        W = [[R.one() if i == j else R.zero() for j in range(g)] for i in range(g)]
        P = [row[:] for row in W]
        for _ in range(prec):
            P = [[sum((-(P[i][k] * E[k][j]) for k in range(g)), R.zero()) for j in range(g)]
                 for i in range(g)]
            if all(p.is_zero() for row in P for p in row):
                break
            W = [[W[i][j] + P[i][j] for j in range(g)] for i in range(g)]
    Rout = JetRing(g, 0, prec, False, G.field, G.names)
    xs = [Rout.var(k) for k in range(g)]
    logs = []
    for i in range(g):
        acc = Rout.zero()
        for k in range(g):
            a = W[i][k].in_ring(Rout)
            for d in range(0, prec):
                part = a.homogeneous_part(d)
                if part:
                    acc = acc + (part * xs[k]).scale(RatFunc(1) / (d + 1))
        logs.append(acc)
    return logs


def check_law_axioms(G: FormalGroupLaw, degree: int | None = None) -> None:
    """Identity, commutativity and associativity modulo degree+1; raises LawAxiomError."""
    D = G.trunc if degree is None else min(degree, G.trunc)
    g = G.g
    for i, p in enumerate(G.comul):
        if p.constant_term():
            raise LawAxiomError("identity", f"F_{i} has a constant term")
    R2 = JetRing(2 * g, 0, D, False, G.field)
    F = comul_in_single(G, R2, 0, g)
    for i in range(g):
        Fi = F[i].truncate(D)
        left = DiffPoly(R2, {m: c for m, c in Fi.terms.items()
                             if all(s < g for s, _ in R2.exponents(m))})
        right = DiffPoly(R2, {m: c for m, c in Fi.terms.items()
                              if all(s >= g for s, _ in R2.exponents(m))})
        if left != R2.var(i):
            raise LawAxiomError("identity", f"F_{i}(X, 0) != X_{i}")
        if right != R2.var(g + i):
            raise LawAxiomError("identity", f"F_{i}(0, Y) != Y_{i}")
        swap = {JetVar(k, 0): R2.var((k + g) % (2 * g)) for k in range(2 * g)}
        if substitute(Fi, {v: swap[v] for v in Fi.variables_used()}, R2) != Fi:
            raise LawAxiomError("commutativity", f"F_{i}(X, Y) != F_{i}(Y, X)")
    R3 = JetRing(3 * g, 0, D, False, G.field)
    FXY = comul_in_single(G, R3, 0, g)
    FYZ = comul_in_single(G, R3, g, 2 * g)
    FXY = [p.truncate(D) for p in FXY]
    FYZ = [p.truncate(D) for p in FYZ]
    for i in range(g):
        base = comul_in_single(G, R3, 0, g)[i].truncate(D)
        lhs_imgs = {JetVar(k, 0): FXY[k] for k in range(g)}
        lhs_imgs.update({JetVar(g + k, 0): R3.var(2 * g + k) for k in range(g)})
        rhs_imgs = {JetVar(k, 0): R3.var(k) for k in range(g)}
        rhs_imgs.update({JetVar(g + k, 0): FYZ[k] for k in range(g)})
        used = base.variables_used()
        lhs = substitute(base, {v: lhs_imgs[v] for v in used}, R3)
        rhs = substitute(base, {v: rhs_imgs[v] for v in used}, R3)
        if lhs != rhs:
            raise LawAxiomError("associativity", f"F_{i}(F(X,Y),Z) != F_{i}(X,F(Y,Z))")


def nn_coordinates_primitive(G: FormalGroupLaw, n: int) -> bool:
    """True iff the raw jet coordinates are already additive on N^nG.

    Holds for G_a and to low order for laws without quadratic terms; fails for G_m at n = 2,
    where d^2 x restricts to X'' + Y'' + 2 X' Y'.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    jc = G.jet_comul(n)
    R = jc.ring
    for j in range(G.g):
        for i in range(1, n + 1):
            target = R.var(j, i, Side.LEFT) + R.var(j, i, Side.RIGHT)
            if restrict_to_N(jc.images[JetVar(j, i)]) != target:
                return False
    return True


def restricted_N_law(G: FormalGroupLaw, n: int) -> FormalGroupLaw:
    """The group law of N^nG in the coordinates d^i x_j (i = 1..n), as an ng-dimensional law.

    Generator (j, i) becomes number j*n + (i-1).
    """
    jc = G.jet_comul(n)
    src = jc.ring
    gN = G.g * n
    R = _tensor0(gN, G.trunc, G.field)
    comul = []
    for j in range(G.g):
        for i in range(1, n + 1):
            img = restrict_to_N(jc.images[JetVar(j, i)])
            terms = {}
            for m, c in img.terms.items():
                powers = {}
                for s_, e in src.exponents(m):
                    v = src.slot_var(s_)
                    powers[JetVar(v.gen * n + v.order - 1, 0, v.side)] = e
                terms[R.monomial(powers)] = c
            comul.append(DiffPoly(R, terms))
    return FormalGroupLaw(f"N^{n}({G.name})", gN, tuple(comul), G.trunc, G.exact, G.field)


def check_Nn_additive(G: FormalGroupLaw, n: int) -> bool:
    """Certify N^nG = G_a^(ng): the restricted law has a polynomial logarithm of degree <= n
    that is tangent to the identity and turns the law into addition (mod degree D+1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if G.trunc < n:
        raise ValueError("truncation degree must be at least n")
    NG = restricted_N_law(G, n)
    logs = formal_log(NG)
    for k, l in enumerate(logs):
        if l.total_degree() > n:
            return False
        lin = l.homogeneous_part(1)
        if lin != lin.ring.var(k):
            return False
    R2 = _tensor0(NG.g, G.trunc, G.field)
    for k, l in enumerate(logs):
        imgs = {JetVar(q, 0): NG.comul[q] for q in range(NG.g)}
        used = l.variables_used()
        lhs = substitute(l, {v: imgs[v] for v in used}, R2)
        rhs = l.to_side(Side.LEFT, R2) + l.to_side(Side.RIGHT, R2)
        if lhs != rhs:
            return False
    return True


def h_linearity(G: FormalGroupLaw, n: int) -> bool:
    """The degree-1 part of images(d^n x_j) in order-n variables is d^n x_j (x) 1 + 1 (x) d^n x_j."""
    jc = G.jet_comul(n)
    R = jc.ring
    for j in range(G.g):
        img = jc.images[JetVar(j, n)].homogeneous_part(1)
        top = DiffPoly(R, {m: c for m, c in img.terms.items()
                           if R.slot_var(R.exponents(m)[0][0]).order == n})
        if top != R.var(j, n, Side.LEFT) + R.var(j, n, Side.RIGHT):
            return False
    return True
