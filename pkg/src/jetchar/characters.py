"""Differential characters X_n(G), their K{d}-module structure, primitive data and splitting numbers.

Every formal character of a formal group law is a K-combination of the total derivatives
d^i l_j of the formal logarithm, and its linear part is the coefficient vector itself.  So a
character is stored as its coefficient vector ``c`` (coordinates ordered by (gen, order)), and
all dimension bookkeeping is exact linear algebra on these vectors.

A formal character is algebraic (a function on the jet space of the group) exactly when its
slice ``sum_ij c_ij l_j^[i](x)`` is algebraic, where ``^[i]`` differentiates coefficients i
times.  The slice test clears a fixed denominator and matches against a finite ansatz of
algebraic functions; see :func:`algebraic_coefficients`.
"""
from __future__ import annotations

import itertools
import weakref
from dataclasses import dataclass, field
from typing import Sequence

from . import series as S
from .basefield import ONE, ZERO, RatFunc, derive, echelon_basis, nullspace, rank
from .diffring import (DiffPoly, JetRing, JetVar, Side, linear_form, restrict_below, substitute,
                       total_derive)
from .groups import (FormalGroupLaw, Legendre, formal_log, invariant_matrix,
                     legendre_curve_series, legendre_log_series)


class TruncationError(RuntimeError):
    """Character dimensions changed between truncation D and D + 2."""


class InvariantViolation(AssertionError):
    """A structural identity that must hold failed (engine or truncation problem)."""

    def __init__(self, ident: str, detail: str):
        self.ident = ident
        super().__init__(f"{ident}: {detail}")


_CACHE: "weakref.WeakKeyDictionary[FormalGroupLaw, dict]" = weakref.WeakKeyDictionary()


def _cache(G: FormalGroupLaw) -> dict:
    return _CACHE.setdefault(G, {})


def idx(G_or_g, i: int, j: int, n: int) -> int:
    """Position of the coordinate d^i x_j in a level-n coefficient vector."""
    return j * (n + 1) + i


# ---------------------------------------------------------------------------
# additivity


def additivity_defect(G: FormalGroupLaw, n: int, p: DiffPoly) -> DiffPoly:
    """m*(p) - p (x) 1 - 1 (x) p in the level-n tensor ring, truncated at D."""
    ring = G.single_ring(n)
    p = p.in_ring(ring)
    jc = G.jet_comul(n)
    used = p.variables_used()
    img = substitute(p, {v: jc.images[v] for v in used}, jc.ring)
    return img - p.to_side(Side.LEFT, jc.ring) - p.to_side(Side.RIGHT, jc.ring)


def log_derivatives(G: FormalGroupLaw, n: int) -> list[list[DiffPoly]]:
    """``out[j][i] = d^i l_j`` in the level-n single ring truncated at D."""
    key = ("dlog", n)
    c = _cache(G)
    if key not in c:
        ring = G.single_ring(n)
        logs = [l.in_ring(ring) for l in formal_log(G)]
        out = []
        for l in logs:
            chain = [l]
            for _ in range(n):
                chain.append(total_derive(chain[-1]))
            out.append(chain)
        c[key] = out
    return c[key]


def theta_from_vector(G: FormalGroupLaw, n: int, vec: Sequence[RatFunc]) -> DiffPoly:
    chains = log_derivatives(G, n)
    ring = G.single_ring(n)
    acc = ring.zero()
    for j in range(G.g):
        for i in range(n + 1):
            c = vec[idx(G, i, j, n)]
            if c:
                acc = acc + chains[j][i].scale(c)
    return acc


# ---------------------------------------------------------------------------
# algebraicity of slices


def _legendre_params(n: int, D: int) -> tuple[int, int, int]:
    """Pole order k, ansatz degree dP and series length for the Legendre slice test."""
    k = n
    dP = 5 * n + D
    return k, dP, 2 * dP + n + 12


def _legendre_space(lam: RatFunc, n: int, D: int, fieldcfg) -> list[list[RatFunc]]:
    """c in K^(n+1) with sum c_i l^[i] = (P0(z) + P1(z) w(z)) / (z disc(z))^k."""
    k, dP, N = _legendre_params(n, D)
    ell = legendre_log_series(lam, N, fieldcfg)
    slices = [ell]
    for _ in range(n):
        slices.append(S.derive_coefficients(slices[-1], fieldcfg))
    w, _ = legendre_curve_series(lam, N, fieldcfg)
    disc = S.zeros(N)
    disc[0], disc[2], disc[4] = ONE, 2 * (ONE + lam), (ONE - lam) ** 2
    B = S.mul(S.monomial(1, N), disc)
    Bk = S.power(B, k)
    cols = [S.mul(s, Bk) for s in slices]
    ncol = len(cols) + dP + 1
    rows = []
    for e in range(dP + 1, N):
        row = [col[e] for col in cols]
        row += [w[e - a] if e - a >= 0 else ZERO for a in range(dP + 1)]
        rows.append(row)
    ker = nullspace(rows, ncol)
    proj = [v[: n + 1] for v in ker]
    return echelon_basis(proj) if proj else []


def _det(M: list[list[DiffPoly]], ring: JetRing) -> DiffPoly:
    g = len(M)
    total = ring.zero()
    for perm in itertools.permutations(range(g)):
        sign = 1
        for a in range(g):
            for b in range(a + 1, g):
                if perm[a] > perm[b]:
                    sign = -sign
        term = ring.one()
        for a in range(g):
            term = term * M[a][perm[a]].in_ring(ring)
        total = total + (term if sign > 0 else -term)
    return total


def _rational_space(A: FormalGroupLaw, n: int, D: int) -> list[list[RatFunc]]:
    """c with sum c_ij l_j^[i] * B^k a polynomial of degree <= dP, B = det dF/dY(x, 0)."""
    g = A.g
    fdeg = max(p.total_degree() for p in A.comul)
    Rb = JetRing(g, 0, None, False, A.field)
    B = _det(invariant_matrix(A, max(fdeg, 1)), Rb)
    degB = max(B.total_degree(), 0)
    k = n
    dP = D + k * degB
    prec = dP + (n + 1) * g + 4
    R = JetRing(g, 0, prec, False, A.field)
    logs = [l.in_ring(R) for l in formal_log(A, prec)]
    Bk = (B ** k).in_ring(R) if k else R.one()
    cols = []
    for j in range(g):
        for i in range(n + 1):
            s = logs[j]
            for _ in range(i):
                s = s.map_coefficients(lambda c: derive(c, A.field))
            cols.append((idx(A, i, j, n), (s * Bk).terms if s else {}))
    cols.sort()
    monos = sorted({m for _, t in cols for m in t if R.degree(m) > dP})
    rows = [[t.get(m, ZERO) for _, t in cols] for m in monos]
    ncol = len(cols)
    if not rows:
        return [[ONE if a == b else ZERO for b in range(ncol)] for a in range(ncol)]
    return nullspace(rows, ncol)


def block_algebraic_space(A: FormalGroupLaw, n: int, D: int | None = None) -> list[list[RatFunc]]:
    """Echelon basis of the algebraic coefficient vectors of an atomic law at level n."""
    D = A.trunc if D is None else D
    key = ("alg", n, D)
    c = _cache(A)
    if key not in c:
        if isinstance(A.model, Legendre):
            c[key] = _legendre_space(A.model.lam, n, D, A.field)
        elif A.exact:
            c[key] = _rational_space(A, n, D)
        else:
            raise NotImplementedError(f"no algebraic model known for {A.name}")
    return c[key]


def algebraic_coefficients(G: FormalGroupLaw, n: int, D: int | None = None) -> list[list[RatFunc]]:
    """Basis of coefficient vectors of algebraic characters of level n (direct sum over blocks)."""
    size = (n + 1) * G.g
    out = []
    for off, A in G.blocks():
        for v in block_algebraic_space(A, n, D):
            full = [ZERO] * size
            for j in range(A.g):
                for i in range(n + 1):
                    full[idx(G, i, off + j, n)] = v[idx(A, i, j, n)]
            out.append(full)
    return echelon_basis(out) if out else []


# ---------------------------------------------------------------------------
# characters


@dataclass
class Character:
    """An algebraic character of level ``level``; ``vec`` is its linear part."""

    G: FormalGroupLaw = field(repr=False)
    level: int
    vec: list

    @property
    def order(self) -> int:
        """Strict order: the largest i with a nonzero coefficient of some d^i x_j."""
        best = -1
        for j in range(self.G.g):
            for i in range(self.level + 1):
                if self.vec[idx(self.G, i, j, self.level)]:
                    best = max(best, i)
        return best

    def leading(self) -> list[RatFunc]:
        """Row A_n of coefficients of d^n x_j, n the strict order."""
        n = self.order
        return [self.vec[idx(self.G, n, j, self.level)] for j in range(self.G.g)]

    def linear(self) -> dict[JetVar, RatFunc]:
        return {JetVar(j, i): self.vec[idx(self.G, i, j, self.level)]
                for j in range(self.G.g) for i in range(self.level + 1)
                if self.vec[idx(self.G, i, j, self.level)]}

    @property
    def theta(self) -> DiffPoly:
        return theta_from_vector(self.G, self.level, self.vec)

    def lift(self, level: int) -> "Character":
        """Pullback u* to a higher level (same polynomial, longer vector)."""
        return Character(self.G, level, lift_vector(self.G, self.vec, self.level, level))

    def derive(self) -> "Character":
        return Character(self.G, self.level + 1, del_vector(self.G, self.vec, self.level))

    def to_text(self) -> str:
        return self.theta.to_text()


def lift_vector(G: FormalGroupLaw, vec, n: int, level: int) -> list[RatFunc]:
    out = [ZERO] * ((level + 1) * G.g)
    for j in range(G.g):
        for i in range(n + 1):
            out[idx(G, i, j, level)] = vec[idx(G, i, j, n)]
    return out


def del_vector(G: FormalGroupLaw, vec, n: int) -> list[RatFunc]:
    """Linear part of d(theta): (dc)_i = c_i' + c_(i-1)."""
    out = [ZERO] * ((n + 2) * G.g)
    for j in range(G.g):
        for i in range(n + 1):
            c = vec[idx(G, i, j, n)]
            if c:
                out[idx(G, i, j, n + 1)] += derive(c, G.field)
                out[idx(G, i + 1, j, n + 1)] += c
    return out


def is_character(G: FormalGroupLaw, n: int, p: DiffPoly) -> bool:
    return additivity_defect(G, n, p).is_zero()


def solve_characters(G: FormalGroupLaw, n: int, verify: bool = False) -> list[Character]:
    """Echelon basis of X_n(G).  With ``verify`` each basis element's defect is recomputed."""
    basis = [Character(G, n, v) for v in algebraic_coefficients(G, n)]
    if verify:
        for ch in basis:
            if not is_character(G, n, ch.theta):
                raise InvariantViolation("additivity", f"nonzero defect for {ch.to_text()}")
    return basis


def del_action(ch: Character, verify: bool = True) -> Character:
    """The derivative of a character; additivity of the result is re-checked."""
    out = ch.derive()
    if verify:
        theta = total_derive(ch.theta, ch.G.single_ring(ch.level + 1))
        if theta != out.theta:
            raise InvariantViolation("del-action", "d(theta) differs from the d-image of its linear part")
        if not is_character(ch.G, out.level, theta):
            raise InvariantViolation("del-action", "derivative of a character is not additive")
    return out


def iota_leading_check(ch: Character) -> bool:
    """Setting all variables of order below the strict order to zero leaves A_n . d^n x."""
    n = ch.order
    if n < 1:
        raise ValueError("needs strict order >= 1")
    theta = ch.theta
    ring = theta.ring
    expect = linear_form(ring, {JetVar(j, n): a for j, a in enumerate(ch.leading()) if a})
    return restrict_below(theta, n) == expect


# ---------------------------------------------------------------------------
# the formal ansatz (oracle for the logarithm route)


def solve_formal_characters(G: FormalGroupLaw, n: int) -> list[list[RatFunc]]:
    """Linear parts of all formal solutions of the additivity equation at level n.

    Unknowns are the coefficients of every monomial of degree 1..D in the level-n jet
    variables.  Returns an echelon basis of the projected linear parts.
    """
    ring = G.single_ring(n)
    variables = ring.variables()
    monos = []
    for d in range(1, G.trunc + 1):
        for combo in itertools.combinations_with_replacement(variables, d):
            powers = {}
            for v in combo:
                powers[v] = powers.get(v, 0) + 1
            monos.append(powers)
    cols = []
    for powers in monos:
        p = ring.from_terms({tuple(powers.items()): ONE})
        cols.append(additivity_defect(G, n, p).terms)
    keys = sorted({m for t in cols for m in t})
    rows = [[t.get(m, ZERO) for t in cols] for m in keys]
    ker = nullspace(rows, len(monos)) if rows else \
        [[ONE if a == b else ZERO for b in range(len(monos))] for a in range(len(monos))]
    lin_pos = {v: k for k, powers in enumerate(monos) if len(powers) == 1
               for v, e in powers.items() if e == 1}
    proj = []
    for v in ker:
        proj.append([v[lin_pos[JetVar(j, i)]] for j in range(G.g) for i in range(n + 1)])
    return echelon_basis(proj) if proj else []


# ---------------------------------------------------------------------------
# the character space


def quotient_rank(sub: list[list[RatFunc]], space: list[list[RatFunc]]) -> int:
    """dim(space) - rank(sub), with sub assumed inside span(space)."""
    return len(space) - (rank(sub) if sub else 0)


def derive_h(l: Sequence[int], g: int) -> list[int]:
    """h_0 = 0, h_1 = g - l_0 - l_1, h_n = h_(n-1) - l_n; must be >= 0 and weakly decreasing."""
    h = [0]
    if len(l) > 1:
        h.append(g - l[0] - l[1])
    for k in range(2, len(l)):
        h.append(h[-1] - l[k])
    for k, v in enumerate(h):
        if v < 0:
            raise InvariantViolation("h-nonnegative", f"h_{k} = {v} < 0 for l = {list(l)}")
    for k in range(2, len(h)):
        if h[k] > h[k - 1]:
            raise InvariantViolation("h-decreasing", f"h_{k} > h_{k - 1} for l = {list(l)}")
    return h


@dataclass
class PrimitiveBasis:
    characters: list           # Theta_i, sorted by order
    orders: list
    m: int
    tilde: list                # d^(m - o_i) Theta_i at level m
    A: list                    # g x g leading matrix


@dataclass
class CharacterSpace:
    G: FormalGroupLaw = field(repr=False)
    N: int
    bases: list                # bases[n] = list[Character]
    dimX: list
    l: list
    h: list
    m_l: int | None
    m_u: int | None
    saturated: bool
    stable: bool | None = None  # D vs D+2 agreement (None when no truncated block)
    primitive: PrimitiveBasis | None = None

    def span_lower(self, n: int) -> list[list[RatFunc]]:
        """Vectors of u*X_(n-1) + d X_(n-1) inside level n."""
        if n == 0:
            return []
        prev = self.bases[n - 1]
        return ([lift_vector(self.G, c.vec, n - 1, n) for c in prev]
                + [del_vector(self.G, c.vec, n - 1) for c in prev])


def primitive_dims(G: FormalGroupLaw, bases: list[list[Character]]) -> list[int]:
    l = []
    for n, basis in enumerate(bases):
        if n == 0:
            l.append(len(basis))
            continue
        prev = bases[n - 1]
        sub = [lift_vector(G, c.vec, n - 1, n) for c in prev] + [del_vector(G, c.vec, n - 1) for c in prev]
        l.append(len(basis) - (rank(sub) if sub else 0))
    return l


def splitting_numbers(dimX: Sequence[int], l: Sequence[int], g: int) -> tuple[int | None, int | None, bool]:
    """(m_l, m_u, saturated); m_u is the largest order carrying a primitive character."""
    m_l = next((n for n, d in enumerate(dimX) if d > 0), None)
    nz = [n for n, v in enumerate(l) if v > 0]
    m_u = max(nz) if nz else None
    saturated = sum(l) == g
    if m_l is not None and m_u is not None and m_l > m_u:
        raise InvariantViolation("m_l<=m_u", f"m_l = {m_l} > m_u = {m_u}")
    return m_l, m_u, saturated


def has_truncated_block(G: FormalGroupLaw) -> bool:
    return any(not A.exact for _, A in G.blocks())


def stability_check(G: FormalGroupLaw, N: int) -> bool:
    """Dimensions of X_n at D and D+2 agree for n <= N."""
    D = G.trunc
    for n in range(N + 1):
        a = len(algebraic_coefficients(G, n, D))
        b = len(algebraic_coefficients(G, n, D + 2))
        if a != b:
            return False
    return True


def primitive_basis(space: CharacterSpace) -> PrimitiveBasis:
    """Echelon choice of primitive characters, their prolongations to level m and the matrix A."""
    G = space.G
    if sum(space.l) != G.g:
        raise InvariantViolation("saturation", f"sum l = {sum(space.l)} < g = {G.g}; raise max order")
    chosen = []
    for n, ln in enumerate(space.l):
        if ln == 0:
            continue
        span = space.span_lower(n)
        r0 = rank(span) if span else 0
        picked = 0
        for ch in space.bases[n]:
            trial = span + [ch.vec]
            r = rank(trial)
            if r > r0:
                span, r0 = trial, r
                chosen.append(ch)
                picked += 1
                if picked == ln:
                    break
        if picked != ln:
            raise InvariantViolation("primitive-count", f"found {picked} of {ln} primitives at order {n}")
    orders = [c.order for c in chosen]
    for c, n in zip(chosen, orders):
        if c.level != n:
            raise InvariantViolation("primitive-order", "primitive character has strict order below its level")
    m = max(orders)
    tilde = []
    for c in chosen:
        x = c
        while x.level < m:
            x = x.derive()
        tilde.append(x)
    A = [[x.vec[idx(G, m, j, m)] for j in range(G.g)] for x in tilde]
    if rank(A) != G.g:
        raise InvariantViolation("leading-matrix", "leading matrix A is singular")
    return PrimitiveBasis(chosen, orders, m, tilde, A)


def character_space(G: FormalGroupLaw, N: int | None = None, check_stability: bool = True,
                    verify: bool = False) -> CharacterSpace:
    """X_0 .. X_N with l, h, splitting numbers and (when saturated) a primitive basis."""
    if N is None:
        N = G.declared_r + 2 if G.declared_r is not None else 4
    bases = [solve_characters(G, n, verify=verify) for n in range(N + 1)]
    dimX = [len(b) for b in bases]
    l = primitive_dims(G, bases)
    h = derive_h(l, G.g)
    m_l, m_u, saturated = splitting_numbers(dimX, l, G.g)
    stable = None
    if check_stability and has_truncated_block(G):
        stable = stability_check(G, N)
        if not stable:
            raise TruncationError(f"character dimensions of {G.name} change between D = {G.trunc} "
                                  f"and D = {G.trunc + 2}")
    space = CharacterSpace(G, N, bases, dimX, l, h, m_l, m_u, saturated, stable)
    if saturated:
        space.primitive = primitive_basis(space)
    return space


def dim_formula(l: Sequence[int], n: int) -> int:
    """(n+1) l_0 + n l_1 + ... + 1 l_n."""
    return sum((n + 1 - i) * l[i] for i in range(n + 1))
