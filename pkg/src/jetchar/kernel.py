"""The map [Theta~]_n, linearized kernel dimensions of K^nG and the vectorial-extension ledger."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .basefield import ONE, ZERO, RatFunc, random_ratfunc, rank
from .characters import (Character, CharacterSpace, InvariantViolation, PrimitiveBasis, idx,
                         is_character, lift_vector, theta_from_vector)
from .diffring import total_derive
from .groups import FormalGroupLaw


@dataclass
class ThetaMap:
    G: FormalGroupLaw = field(repr=False)
    m: int
    level: int
    components: dict           # (s, i) -> Character at level m + s

    def rows(self) -> list[list[RatFunc]]:
        """Linear parts of all components as level-n vectors, ordered (s, i)."""
        return [lift_vector(self.G, ch.vec, ch.level, self.level)
                for _, ch in sorted(self.components.items())]


def build_theta_map(G: FormalGroupLaw, pb: PrimitiveBasis, n: int, verify: bool = True) -> ThetaMap:
    """Components d^s Theta~_i, 0 <= s <= n - m; each one re-checked as a character."""
    m = pb.m
    if n < m:
        raise ValueError(f"level {n} below m = {m}")
    comps = {}
    for i, base in enumerate(pb.tilde):
        ch = base
        for s in range(n - m + 1):
            comps[(s, i)] = ch
            if s < n - m:
                ch = ch.derive()
    tm = ThetaMap(G, m, n, comps)
    if verify:
        for (s, i), ch in comps.items():
            if not is_character(G, ch.level, ch.theta):
                raise InvariantViolation("component-additivity", f"component ({s}, {i}) is not a character")
    return tm


def d_stable(tm: ThetaMap) -> bool:
    """The total derivative of component (s, i) is component (s+1, i), as polynomials."""
    G = tm.G
    for (s, i), ch in tm.components.items():
        nxt = tm.components.get((s + 1, i))
        if nxt is None:
            continue
        if total_derive(ch.theta, G.single_ring(ch.level + 1)) != nxt.theta:
            return False
    return True


def kernel_dims(tm: ThetaMap) -> tuple[int, int]:
    """(Jacobian rank, dim K^nG) from the linear parts at the identity, with structural checks."""
    G, m, n = tm.G, tm.m, tm.level
    g = G.g
    rows = tm.rows()
    r = rank(rows) if rows else 0
    if r != (n - m + 1) * g:
        raise InvariantViolation("surjectivity", f"Jacobian rank {r} != {(n - m + 1) * g}")
    # block triangularity: component (s, i) has no coordinates above order m + s,
    # and its order-(m + s) block is row i of A
    A = [[tm.components[(0, i)].vec[idx(G, m, j, m)] for j in range(g)] for i in range(g)]
    for (s, i), ch in tm.components.items():
        row = lift_vector(G, ch.vec, ch.level, n)
        for j in range(g):
            for o in range(m + s + 1, n + 1):
                if row[idx(G, o, j, n)]:
                    raise InvariantViolation("block-triangular", f"component ({s}, {i}) reaches order {o}")
            if row[idx(G, m + s, j, n)] != A[i][j]:
                raise InvariantViolation("block-diagonal", f"component ({s}, {i}) diagonal block differs from A")
    return r, (n + 1) * g - r


def top_block(tm: ThetaMap) -> list[list[RatFunc]]:
    """Coefficients of d^n x in the top components (s = n - m)."""
    G, n = tm.G, tm.level
    s = n - tm.m
    return [[tm.components[(s, i)].vec[idx(G, n, j, n)] for j in range(G.g)] for i in range(G.g)]


@dataclass
class KernelReport:
    m: int
    levels: list
    dimJ: dict
    jacobianRank: dict
    dimK: dict
    dimL: int
    stability: bool
    dStable: bool
    degenerate: bool
    A: list
    violations: list = field(default_factory=list)

    def to_json(self) -> dict:
        from .basefield import format_ratfunc
        return {
            "m": self.m,
            "levels": self.levels,
            "dimJ": {str(k): v for k, v in self.dimJ.items()},
            "jacobianRank": {str(k): v for k, v in self.jacobianRank.items()},
            "dimK": {str(k): v for k, v in self.dimK.items()},
            "dimL": self.dimL,
            "stability": self.stability,
            "dStable": self.dStable,
            "degenerate": self.degenerate,
            "A": [[format_ratfunc(a) for a in row] for row in self.A],
            "violations": self.violations,
        }


def dim_L(G: FormalGroupLaw, pb: PrimitiveBasis) -> int:
    """Kernel dimension of the level-m linear parts restricted to N^mG (orders >= 1)."""
    m, g = pb.m, G.g
    rows = [[ch.vec[idx(G, i, j, m)] for j in range(g) for i in range(1, m + 1)] for ch in pb.tilde]
    if m == 0:
        return 0
    return m * g - rank(rows)


def vectorial_extension_report(G: FormalGroupLaw, pb: PrimitiveBasis, extra: int = 2,
                               verify: bool = True) -> KernelReport:
    """Kernel dimensions at levels m .. m + extra and the L(G) -> K(G) -> G ledger."""
    m, g = pb.m, G.g
    levels = list(range(m, m + extra + 1))
    dimJ, jr, dk = {}, {}, {}
    violations = []
    dstable = True
    for n in levels:
        tm = build_theta_map(G, pb, n, verify=verify)
        r, k = kernel_dims(tm)
        dimJ[n], jr[n], dk[n] = (n + 1) * g, r, k
        if top_block(tm) != pb.A:
            violations.append(f"top-block: top block at level {n} differs from A")
        if verify and not d_stable(tm):
            dstable = False
    degenerate = m == 0
    dl = dim_L(G, pb)
    stability = len(set(dk.values())) == 1
    if not stability:
        violations.append("dimK-constant: dimK varies with n")
    if dk[m] != m * g:
        violations.append(f"dimK-at-m: dimK[m] = {dk[m]} != m g = {m * g}")
    if not degenerate:
        if dl != (m - 1) * g:
            violations.append(f"extension: dimL = {dl} != (m-1) g = {(m - 1) * g}")
        if dl + g != dk[m]:
            violations.append(f"extension: dimL + g = {dl + g} != dimK[m] = {dk[m]}")
    if not dstable:
        violations.append("d-stability: derivative of a component is not the next component")
    return KernelReport(m, levels, dimJ, jr, dk, dl, stability, dstable, degenerate, pb.A, violations)


def perturbed_primitive_basis(space: CharacterSpace, rng: random.Random,
                              max_tries: int = 20) -> PrimitiveBasis:
    """Another primitive basis with a shuffled choice.

    Mixing stays within one order: over K at the top order m, over Q below it.  A
    non-constant c on Theta_i with o_i < m brings c' Theta_i into d^(m - o_i)(c Theta_i), and
    adding a lower-order primitive to another one changes the rows outright; both move the
    kernel (not its dimension).  Singular draws are redrawn.
    """
    G = space.G
    pb = space.primitive
    m = pb.m
    for _ in range(max_tries):
        chosen = []
        for k, ch in enumerate(pb.characters):
            n = ch.level
            coef = _unit if n == m else _qunit
            u = coef(rng)
            vec = [c * u for c in ch.vec]
            for k2, other in enumerate(pb.characters):
                if k2 != k and other.level == n and rng.random() < 0.5:
                    a = coef(rng)
                    vec = [x + a * y for x, y in zip(vec, other.vec)]
            chosen.append(Character(G, n, vec))
        rng.shuffle(chosen)
        chosen.sort(key=lambda c: c.level)
        tilde = []
        for c in chosen:
            x = c
            while x.level < m:
                x = x.derive()
            tilde.append(x)
        A = [[x.vec[idx(G, m, j, m)] for j in range(G.g)] for x in tilde]
        if rank(A) == G.g:
            return PrimitiveBasis(chosen, [c.level for c in chosen], m, tilde, A)
    raise InvariantViolation("leading-matrix", "no nonsingular perturbation found")


def _qunit(rng: random.Random) -> RatFunc:
    return RatFunc(rng.choice([-3, -2, -1, 1, 2, 3, 5]))


def _unit(rng: random.Random) -> RatFunc:
    while True:
        r = random_ratfunc(rng, 1, 4)
        if r:
            return r


def basis_independence(G: FormalGroupLaw, pb1: PrimitiveBasis, pb2: PrimitiveBasis, extra: int = 2) -> bool:
    """Row spaces of the linear parts of [Theta~]_n agree for n = m .. m + extra."""
    if pb1.m != pb2.m:
        return False
    for n in range(pb1.m, pb1.m + extra + 1):
        r1 = build_theta_map(G, pb1, n, verify=False).rows()
        r2 = build_theta_map(G, pb2, n, verify=False).rows()
        a, b = rank(r1), rank(r2)
        if not (a == b == rank(r1 + r2)):
            return False
    return True
