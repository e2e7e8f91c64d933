"""Randomized property suites, one per module; shared by ``jetchar verify`` and the tests."""
from __future__ import annotations

import random
import traceback
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

from . import basefield as bf
from .basefield import ONE, ZERO, RatFunc, T, derive, random_ratfunc
from .characters import (Character, TruncationError, character_space, del_action, del_vector,
                         derive_h, dim_formula, idx, iota_leading_check, lift_vector,
                         stability_check)
from .diffring import (DiffPoly, JetRing, JetVar, augmentation_membership, linear_part,
                       restrict_to_N, split_augmentation, substitute, total_derive)
from .groups import (FormalGroupLaw, catalog, check_law_axioms, check_Nn_additive, ga, gm,
                     h_linearity, legendre, product)
from .hasse import (exp_del, jet_point_oracle, legendre_base_points, legendre_curve,
                    perturb_jet, prolong_ideal, solve_jet)
from .kernel import basis_independence, perturbed_primitive_basis, vectorial_extension_report

SUITES = ("field", "ring", "oracle", "groups", "characters", "kernel")


@dataclass
class Failure:
    case: int
    seed: str
    invariant: str
    detail: str

    def to_json(self) -> dict:
        return {"case": self.case, "seed": self.seed, "invariant": self.invariant, "detail": self.detail}


@dataclass
class SuiteResult:
    suite: str
    cases: int = 0
    failures: list = field(default_factory=list)
    per_invariant: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"suite": self.suite, "cases": self.cases, "per_invariant": self.per_invariant,
                "failures": [f.to_json() for f in self.failures]}


class _Runner:
    def __init__(self, suite: str, seed: int):
        self.result = SuiteResult(suite)
        self.seed = seed

    def rng(self, inv: str, k: int) -> tuple[random.Random, str]:
        s = f"{self.seed}:{self.result.suite}:{inv}:{k}"
        return random.Random(s), s

    def check(self, inv: str, k: int, fn: Callable[[random.Random], object]) -> None:
        rng, s = self.rng(inv, k)
        self.result.cases += 1
        self.result.per_invariant[inv] = self.result.per_invariant.get(inv, 0) + 1
        try:
            out = fn(rng)
        except Exception as exc:  # a crash is a failure of the invariant under test
            detail = f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=3)}"
            self.result.failures.append(Failure(k, s, inv, detail))
            return
        if out is not True and out is not None:
            self.result.failures.append(Failure(k, s, inv, str(out)))

    def many(self, inv: str, count: int, fn) -> None:
        for k in range(count):
            self.check(inv, k, fn)


def _expect(cond: bool, msg: str):
    return True if cond else msg


# ---------------------------------------------------------------------------
# shared fixtures


@lru_cache(maxsize=None)
def legendre6() -> FormalGroupLaw:
    return legendre(None, 6)


@lru_cache(maxsize=None)
def twisted_gm(c_text: str = "t^2+1") -> FormalGroupLaw:
    from .parser import parse_group_text
    return parse_group_text(f'name = "gm_twisted"\ndim = 1\nvars = ["x0"]\n'
                            f'comul = ["x0 + y0 + ({c_text})*x0*y0"]\ntrunc = 8\next_dim = 0\n')


@lru_cache(maxsize=None)
def exact_groups() -> tuple:
    return (ga(8), gm(8), catalog("ga*gm", 8), catalog("ga^2*gm", 8), twisted_gm())


def all_groups() -> tuple:
    return exact_groups() + (legendre6(),)


@lru_cache(maxsize=None)
def space_of(G: FormalGroupLaw):
    N = 3 if not G.exact else 4
    return character_space(G, N)


def random_poly(ring: JetRing, rng: random.Random, terms: int = 4, max_deg: int = 3,
                max_order: int | None = None, coeff_deg: int = 1) -> DiffPoly:
    top = ring.max_order if max_order is None else max_order
    vars_ = [v for v in ring.variables() if v.order <= top]
    out = {}
    for _ in range(terms):
        d = rng.randint(1, max_deg)
        powers = {}
        for _ in range(d):
            v = rng.choice(vars_)
            powers[v] = powers.get(v, 0) + 1
        out[tuple(sorted(powers.items()))] = random_ratfunc(rng, coeff_deg, 4)
    return ring.from_terms(out)


def random_character(space, rng: random.Random) -> Character | None:
    """A random K-combination of a basis of X_n for a random n with X_n != 0."""
    levels = [n for n in range(space.N + 1) if space.bases[n]]
    if not levels:
        return None
    n = rng.choice(levels)
    vec = [ZERO] * ((n + 1) * space.G.g)
    for ch in space.bases[n]:
        c = random_ratfunc(rng, 1, 3)
        vec = [a + c * b for a, b in zip(vec, ch.vec)]
    if not any(vec):
        vec = list(space.bases[n][0].vec)
    return Character(space.G, n, vec)


# ---------------------------------------------------------------------------
# suites


def suite_field(seed: int, trials: int = 200) -> SuiteResult:
    r = _Runner("field", seed)

    def axioms(rng):
        a, b, c = (random_ratfunc(rng, 3, 9) for _ in range(3))
        if (a + b) + c != a + (b + c) or (a * b) * c != a * (b * c):
            return "associativity"
        if a * (b + c) != a * b + a * c:
            return "distributivity"
        if a + b != b + a or a * b != b * a:
            return "commutativity"
        if a and a * a.inverse() != ONE:
            return "inverse"
        return True

    def leibniz(rng):
        a, b = random_ratfunc(rng, 3, 9), random_ratfunc(rng, 3, 9)
        return _expect(derive(a * b) == derive(a) * b + a * derive(b), "Leibniz")

    def null_eval(rng):
        rows, cols = rng.randint(1, 4), rng.randint(2, 6)
        M = [[random_ratfunc(rng, 2, 5) for _ in range(cols)] for _ in range(rows)]
        if rng.random() < 0.5 and rows > 1:
            c = random_ratfunc(rng, 1, 3)
            M[-1] = [x + c * y for x, y in zip(M[-1], M[0])]
        ker = bf.nullspace(M, cols)
        if len(ker) != cols - bf.rank(M):
            return "nullity"
        for v in ker:
            if any(bf.mat_vec(M, v)):
                return "not annihilated"
            if next(x for x in v if x) != ONE:
                return "not echelon-normalized"
        t0 = bf.non_pole([x for row in M for x in row] + [x for v in ker for x in v], rng)
        Me = bf.evaluate_matrix(M, t0)
        for v in ker:
            ve = [x(t0) for x in v]
            if any(sum((a * b for a, b in zip(row, ve)), 0) for row in Me):
                return "evaluated kernel vector not in evaluated kernel"
        return True

    def rank_inv(rng):
        rows, cols = rng.randint(1, 4), rng.randint(1, 5)
        M = [[random_ratfunc(rng, 2, 5) for _ in range(cols)] for _ in range(rows)]
        r0 = bf.rank(M)
        M2 = list(M)
        rng.shuffle(M2)
        k = rng.randrange(rows)
        s = ZERO
        while not s:
            s = random_ratfunc(rng, 2, 5)
        M2[k] = [s * x for x in M2[k]]
        return _expect(bf.rank(M2) == r0, "rank changed under row operations")

    r.many("field-axioms", trials, axioms)
    r.many("leibniz", trials, leibniz)
    r.many("nullspace-evaluation", trials // 4, null_eval)
    r.many("rank-invariance", trials // 4, rank_inv)
    return r.result


def augmentation_split_case(rng: random.Random) -> bool | str:
    """Random f in (x), degree <= 4, order <= 2: d f = g1 + g2 with g1 in (x), ord g2 <= max(ord f, 1)."""
    g = rng.randint(1, 2)
    R = JetRing(g, 3, None)
    f = R.zero()
    while f.is_zero():
        for _ in range(rng.randint(1, 3)):
            xj = R.var(rng.randrange(g), 0)
            h = random_poly(R, rng, terms=2, max_deg=3, max_order=2)
            if rng.random() < 0.3:
                h = h + random_ratfunc(rng, 1, 3)
            f = f + xj * h
        f = f.truncate(4)
    if not augmentation_membership(f):
        return "constructed f not in (x)"
    df = total_derive(f)
    g1, g2 = split_augmentation(df)
    if g1 + g2 != df:
        return "split does not add up"
    if not augmentation_membership(g1):
        return "g1 not in (x)"
    if g2.max_order() > max(f.max_order(), 1):
        return f"order of g2 {g2.max_order()} exceeds {max(f.max_order(), 1)}"
    return True


def suite_ring(seed: int, trials: int = 200) -> SuiteResult:
    r = _Runner("ring", seed)
    r.many("augmentation-split", trials, augmentation_split_case)

    def graded(rng):
        R = JetRing(2, 4, None)
        p = random_poly(R, rng, terms=5, max_deg=4, max_order=3)
        for m, c in p.terms.items():
            dp = total_derive(DiffPoly(R, {m: c}))
            if any(R.degree(mm) != R.degree(m) for mm in dp.terms):
                return "degree changed"
        return True

    def leibniz(rng):
        R = JetRing(2, 4, 6)
        p = random_poly(R, rng, max_order=3)
        q = random_poly(R, rng, max_order=3)
        return _expect(total_derive(p * q) == total_derive(p) * q + p * total_derive(q), "Leibniz")

    def power_rule(rng):
        k = rng.randint(2, 6)
        R = JetRing(1, 2, None)
        x, x1, x2 = R.var(0), R.var(0, 1), R.var(0, 2)
        lhs = total_derive(total_derive(x ** k))
        rhs = (x ** (k - 1) * x2).scale(k) + (x ** (k - 2) * x1 * x1).scale(k * (k - 1))
        return _expect(lhs == rhs, "second derivative of x^k")

    def lin_restrict(rng):
        R = JetRing(2, 3, None)
        p = random_poly(R, rng, terms=6, max_deg=3)
        a = linear_part(restrict_to_N(p))
        b = {v: c for v, c in linear_part(p).items() if v.order >= 1}
        return _expect(a == b, "linearPart and restrictToN do not commute")

    r.many("graded-derivation", trials // 4, graded)
    r.many("leibniz", trials // 4, leibniz)
    r.many("power-rule", 10, power_rule)
    r.many("linear-restrict", trials // 4, lin_restrict)
    return r.result


def legendre_jet_case(rng: random.Random) -> bool | str:
    """One valid and one invalid jet of the Legendre curve; verdicts must agree and be right."""
    X = legendre_curve()
    n = rng.randint(1, 3)
    vals, piv = solve_jet(X, n, rng.choice(legendre_base_points()), rng)
    if jet_point_oracle(X, n, vals) is not True:
        return "valid jet rejected"
    bad = perturb_jet(vals, piv, rng)
    if jet_point_oracle(X, n, bad) is not False:
        return "perturbed jet accepted"
    return True


def suite_oracle(seed: int, trials: int = 100) -> SuiteResult:
    r = _Runner("oracle", seed)
    r.many("jet-functor", trials, legendre_jet_case)

    def hom(rng):
        n = rng.randint(0, 4)
        a, b = random_ratfunc(rng, 2, 5), random_ratfunc(rng, 2, 5)
        ok = exp_del(a * b, n) == exp_del(a, n) * exp_del(b, n) and \
            exp_del(a + b, n) == exp_del(a, n) + exp_del(b, n)
        return _expect(ok, "exp_d is not a ring map")

    def tcompat(rng):
        n = rng.randint(0, 4)
        a = random_ratfunc(rng, 2, 5)
        return _expect(exp_del(a, n + 1).truncate(n) == exp_del(a, n), "T-compatibility")

    def prolong(rng):
        n = rng.randint(0, 3)
        X = legendre_curve()
        big, small = prolong_ideal(X, n + 1), prolong_ideal(X, n)
        ok = all(p.in_ring(X.ring(n + 1)) == q.in_ring(X.ring(n + 1))
                 for gb, gs in zip(big.generators, small.generators) for p, q in zip(gb, gs))
        return _expect(ok, "prolongation sequence incompatible")

    r.many("expdel-homomorphism", trials, hom)
    r.many("expdel-T-compatibility", trials // 4, tcompat)
    r.many("prolongation-compatibility", 4, prolong)
    return r.result


def prolongation_square_case(rng: random.Random, groups=None) -> bool | str:
    """substitute(jet comul, d p) = d substitute(jet comul, p) for random p."""
    groups = groups or all_groups()
    G = rng.choice(groups)
    n = rng.randint(1, 3)
    ring = G.single_ring(n)
    p = random_poly(ring, rng, terms=3, max_deg=2 if not G.exact else 3, max_order=n - 1)
    jc_low, jc = G.jet_comul(n - 1), G.jet_comul(n)
    img = substitute(p.in_ring(G.single_ring(n - 1)), jc_low.images, jc_low.ring)
    lhs = total_derive(img, jc.ring)
    dp = total_derive(p)
    rhs = substitute(dp, {v: jc.images[v] for v in dp.variables_used()}, jc.ring)
    return _expect(lhs == rhs, f"prolongation square fails for {G.name}")


def nn_case(rng: random.Random) -> bool | str:
    """On a random group, N^nG is isomorphic to G_a^(ng) by a polynomial logarithm."""
    choice = rng.randrange(4)
    if choice == 0:
        G = rng.choice(all_groups())
    elif choice == 1:
        G = twisted_gm(f"{rng.randint(1, 5)}*t + {rng.randint(1, 5)}")
    else:
        pool = [ga(6), gm(6), twisted_gm()]
        G = product([rng.choice(pool) for _ in range(2)])
    n = rng.randint(1, 3)
    return _expect(check_Nn_additive(G, n), f"N^{n}({G.name}) not certified additive")


def suite_groups(seed: int, trials: int = 200) -> SuiteResult:
    r = _Runner("groups", seed)
    for k, G in enumerate(all_groups()):
        r.check("law-axioms", k, lambda rng, G=G: check_law_axioms(G, 6 if not G.exact else None))
        r.check("H-linearity", k, lambda rng, G=G: _expect(all(h_linearity(G, n) for n in (1, 2, 3)),
                                                          "top-order linear part"))
    r.many("Nn-additive", trials, nn_case)
    r.many("prolongation-square", trials, prolongation_square_case)
    return r.result


def leading_row_case(rng: random.Random) -> bool | str:
    """L(d^s Theta) = A_n . d^(n+s) x for s = 1..3."""
    space = space_of(rng.choice(all_groups()))
    ch = random_character(space, rng)
    lead, n = ch.leading(), ch.order
    x = ch
    for s in range(1, 4):
        x = x.derive()
        if x.order != n + s or x.leading() != lead:
            return f"leading row changed at s = {s}"
    return True


def order_growth_case(rng: random.Random) -> bool | str:
    """d^i Psi has strict order exactly k + i for Psi of strict order k."""
    space = space_of(rng.choice(all_groups()))
    ch = random_character(space, rng)
    k = ch.order
    x = ch
    for i in range(1, rng.randint(1, 4) + 1):
        x = x.derive()
        if x.order != k + i:
            return f"strict order {x.order} != {k + i}"
    return True


def shift_rank_case(rng: random.Random) -> bool | str:
    """The d-shifts of a primitive basis up to level N are K-linearly independent."""
    G = rng.choice([g for g in all_groups() if space_of(g).primitive is not None])
    space = space_of(G)
    pb = perturbed_primitive_basis(space, rng) if rng.random() < 0.7 else space.primitive
    N = rng.randint(pb.m, pb.m + 3)
    rows = []
    for ch in pb.characters:
        x = ch
        while x.level <= N:
            rows.append(lift_vector(G, x.vec, x.level, N))
            x = x.derive()
    return _expect(bf.rank(rows) == len(rows), f"rank {bf.rank(rows)} < {len(rows)}")


def suite_characters(seed: int, trials: int = 200) -> SuiteResult:
    r = _Runner("characters", seed)
    for k, G in enumerate(all_groups()):
        sp = space_of(G)

        def dimx(rng, sp=sp):
            return _expect(all(sp.dimX[n] == dim_formula(sp.l, n) for n in range(sp.N + 1)),
                           f"dimX {sp.dimX} vs l {sp.l}")

        def quotient_dim(rng, sp=sp):
            g = sp.G.g
            return _expect(all(sp.dimX[n] - sp.dimX[n - 1] == g
                               for n in range(sp.m_u + 1, sp.N + 1)), "quotient dimension != g")

        def hn0(rng, sp=sp):
            zeros = [n for n in range(1, sp.N + 1) if sp.h[n] == 0]
            if not zeros:
                return True
            return _expect(all(sp.l[n] == 0 for n in range(zeros[0] + 1, sp.N + 1)), "l_n != 0 after h = 0")

        def xprim(rng, sp=sp):
            m = sp.m_u
            span = sp.span_lower(m)
            ok = sum(sp.l) == sp.G.g and len(sp.bases[m]) - (bf.rank(span) if span else 0) >= 0
            derived = [del_vector(sp.G, c.vec, m - 1) for c in sp.bases[m - 1]] if m > 0 else []
            qdim = len(sp.bases[m]) - (bf.rank(derived) if derived else 0)
            return _expect(ok and qdim == sp.G.g, f"dim X_prim = {qdim}")

        def bound(rng, sp=sp):
            r_ = sp.G.declared_r
            return _expect(r_ is None or sp.m_u <= r_ + 1, f"m_u = {sp.m_u} > r + 1")

        def h_ok(rng, sp=sp):
            derive_h(sp.l, sp.G.g)
            return True

        def del_poly(rng, sp=sp):
            for n in range(sp.N):
                for ch in sp.bases[n]:
                    del_action(ch)
            return True

        def iota(rng, sp=sp):
            for ch in sp.primitive.characters:
                x = ch
                for _ in range(2):
                    if x.order >= 1 and not iota_leading_check(x):
                        return "iota* Theta != L(Theta)"
                    x = x.derive()
            return True

        for inv, fn in [("dim-formula", dimx), ("quotient-dim", quotient_dim), ("h-zero-stops", hn0),
                        ("primitive-quotient", xprim), ("order-bound", bound), ("h-sequence", h_ok),
                        ("del-action", del_poly), ("iota-leading", iota)]:
            r.check(inv, k, fn)
    r.check("truncation-stability", 0,
            lambda rng: _expect(stability_check(legendre6(), 3), "D vs D+2 mismatch"))
    r.many("leading-row", trials, leading_row_case)
    r.many("order-growth", trials, order_growth_case)
    r.many("shift-rank", trials, shift_rank_case)
    return r.result


def suite_kernel(seed: int, trials: int = 20) -> SuiteResult:
    r = _Runner("kernel", seed)
    for k, G in enumerate(all_groups()):
        sp = space_of(G)

        def report(rng, G=G, sp=sp):
            rep = vectorial_extension_report(G, sp.primitive)
            return _expect(not rep.violations, "; ".join(rep.violations))

        r.check("kernel-ledger", k, report)

    def indep(rng):
        G = rng.choice([g for g in all_groups() if space_of(g).primitive.m > 0])
        sp = space_of(G)
        return _expect(basis_independence(G, sp.primitive, perturbed_primitive_basis(sp, rng)),
                       f"kernel changed under a basis change for {G.name}")

    r.many("basis-independence", trials, indep)
    return r.result


SUITE_FUNCS = {"field": suite_field, "ring": suite_ring, "oracle": suite_oracle,
               "groups": suite_groups, "characters": suite_characters, "kernel": suite_kernel}


def run_suite(name: str, seed: int = 0) -> list[SuiteResult]:
    names = SUITES if name == "all" else (name,)
    out = []
    for n in names:
        if n not in SUITE_FUNCS:
            raise KeyError(f"unknown suite {n!r}")
        out.append(SUITE_FUNCS[n](seed))
    return out
