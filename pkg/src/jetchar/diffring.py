"""Sparse differential polynomials in jet variables with the total derivation.

A :class:`JetRing` fixes a layout of jet variables ``d^i x_j`` (optionally in two
copies, Left and Right, for the tensor square) and a degree truncation.  A
monomial is a packed integer: one 8-bit exponent field per variable slot plus a
total-degree field on top, so multiplying monomials is integer addition.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Mapping

from .basefield import DEFAULT_FIELD, ONE, ZERO, FieldConfig, RatFunc, as_ratfunc, derive, format_ratfunc

_BITS = 8
_MASK = (1 << _BITS) - 1
MAX_DEGREE = 254


class Side(enum.IntEnum):
    SINGLE = 0
    LEFT = 1
    RIGHT = 2


@dataclass(frozen=True, order=True)
class JetVar:
    """The jet coordinate ``d^order x_gen`` on the given side."""

    gen: int
    order: int
    side: Side = Side.SINGLE

    def name(self, names: tuple[str, ...] | None = None) -> str:
        base = names[self.gen] if names else f"x{self.gen}"
        if self.order == 0:
            s = base
        elif self.order <= 2:
            s = base + "'" * self.order
        else:
            s = f"{base}^({self.order})"
        if self.side == Side.LEFT:
            return f"L.{s}"
        if self.side == Side.RIGHT:
            return f"R.{s}"
        return s


class OrderOverflow(ValueError):
    """A total derivative would leave the ring's order range."""


class RingMismatch(ValueError):
    pass


class JetRing:
    """Layout and truncation of a jet polynomial ring (the RingConfig of the design).

    ``tensor=False``: variables ``d^i x_j`` with side SINGLE.
    ``tensor=True``: Left and Right copies, used for comultiplication images.
    Single-side polynomials share the Left layout, so relabelling Single -> Left
    is free.
    """

    def __init__(self, g: int, max_order: int, trunc: int | None = None,
                 tensor: bool = False, field: FieldConfig = DEFAULT_FIELD,
                 names: tuple[str, ...] | None = None):
        if g < 1:
            raise ValueError("need at least one generator")
        if max_order < 0:
            raise ValueError("max_order must be >= 0")
        if trunc is not None and not 1 <= trunc <= MAX_DEGREE // 2:
            raise ValueError(f"truncation degree must lie in [1, {MAX_DEGREE // 2}]")
        self.g = g
        self.max_order = max_order
        self.trunc = trunc
        self.tensor = tensor
        self.field = field
        self.names = tuple(names) if names else tuple(f"x{j}" for j in range(g))
        self.block = g * (max_order + 1)
        self.nslots = self.block * (2 if tensor else 1)
        self.deg_shift = _BITS * self.nslots
        self._deg_unit = 1 << self.deg_shift
        self._slot_unit = [(1 << (_BITS * s)) + self._deg_unit for s in range(self.nslots)]
        self._slot_var = []
        for s in range(self.nslots):
            blk, rem = divmod(s, self.block)
            gen, order = divmod(rem, max_order + 1)
            side = (Side.RIGHT if blk else Side.LEFT) if tensor else Side.SINGLE
            self._slot_var.append(JetVar(gen, order, side))
        self._order0 = [s for s in range(self.nslots) if self._slot_var[s].order == 0]
        self._decode = lru_cache(maxsize=None)(self._decode_uncached)

    # identity -----------------------------------------------------------------
    def key(self):
        return (self.g, self.max_order, self.trunc, self.tensor, self.field)

    def same_layout(self, other: "JetRing") -> bool:
        return (self.g, self.max_order, self.tensor) == (other.g, other.max_order, other.tensor)

    def with_(self, **kw) -> "JetRing":
        args = dict(g=self.g, max_order=self.max_order, trunc=self.trunc,
                    tensor=self.tensor, field=self.field, names=self.names)
        args.update(kw)
        return JetRing(**args)

    def __repr__(self):
        return (f"JetRing(g={self.g}, max_order={self.max_order}, trunc={self.trunc}, "
                f"tensor={self.tensor})")

    # slots --------------------------------------------------------------------
    def slot(self, v: JetVar) -> int:
        if not 0 <= v.gen < self.g:
            raise ValueError(f"generator {v.gen} out of range")
        if not 0 <= v.order <= self.max_order:
            raise OrderOverflow(f"order {v.order} exceeds ring max order {self.max_order}")
        if self.tensor:
            if v.side == Side.SINGLE:
                raise ValueError("Single-side variable in a tensor-square ring")
            blk = 1 if v.side == Side.RIGHT else 0
        else:
            if v.side != Side.SINGLE:
                raise ValueError("Left/Right variable outside a tensor-square ring")
            blk = 0
        return blk * self.block + v.gen * (self.max_order + 1) + v.order

    def slot_var(self, s: int) -> JetVar:
        return self._slot_var[s]

    def degree(self, m: int) -> int:
        return m >> self.deg_shift

    def _decode_uncached(self, m: int) -> tuple[tuple[int, int], ...]:
        out = []
        body = m & (self._deg_unit - 1)
        s = 0
        while body:
            e = body & _MASK
            if e:
                out.append((s, e))
            body >>= _BITS
            s += 1
        return tuple(out)

    def exponents(self, m: int) -> tuple[tuple[int, int], ...]:
        """Sparse ``(slot, exponent)`` pairs of a packed monomial."""
        return self._decode(m)

    def monomial(self, powers: Mapping[JetVar, int]) -> int:
        m = 0
        for v, e in powers.items():
            if e < 0:
                raise ValueError("negative exponent")
            if e:
                m += self._slot_unit[self.slot(v)] * e
        return m

    # constructors -------------------------------------------------------------
    def zero(self) -> "DiffPoly":
        return DiffPoly(self, {})

    def one(self) -> "DiffPoly":
        return DiffPoly(self, {0: ONE})

    def const(self, c) -> "DiffPoly":
        c = as_ratfunc(c)
        return DiffPoly(self, {0: c} if c else {})

    def var(self, gen: int, order: int = 0, side: Side | None = None) -> "DiffPoly":
        if side is None:
            side = Side.LEFT if self.tensor else Side.SINGLE
        m = self._slot_unit[self.slot(JetVar(gen, order, side))]
        return DiffPoly(self, {m: ONE})

    def from_terms(self, terms: Mapping[Mapping[JetVar, int] | tuple, object]) -> "DiffPoly":
        out = {}
        for powers, c in terms.items():
            if isinstance(powers, tuple):
                powers = dict(powers)
            m = self.monomial(powers)
            c = as_ratfunc(c)
            if not c:
                continue
            if self.trunc is not None and self.degree(m) > self.trunc:
                continue
            out[m] = out.get(m, ZERO) + c
            if not out[m]:
                del out[m]
        return DiffPoly(self, out)

    def variables(self, max_order: int | None = None, sides: Iterable[Side] | None = None) -> list[JetVar]:
        """Jet variables in canonical order (side, gen, order)."""
        top = self.max_order if max_order is None else max_order
        if sides is None:
            sides = (Side.LEFT, Side.RIGHT) if self.tensor else (Side.SINGLE,)
        return [JetVar(j, i, s) for s in sides for j in range(self.g) for i in range(top + 1)]


class DiffPoly:
    """Immutable sparse polynomial over Q(t) in the jet variables of a :class:`JetRing`."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: JetRing, terms: dict[int, RatFunc]):
        self.ring = ring
        self.terms = terms

    # basic protocol -----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if isinstance(other, DiffPoly):
            if not self.ring.same_layout(other.ring):
                return False
            return self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def _check(self, other: "DiffPoly"):
        if not self.ring.same_layout(other.ring):
            raise RingMismatch(f"{self.ring} vs {other.ring}")

    def _trunc(self) -> int | None:
        return self.ring.trunc

    def __add__(self, other):
        if not isinstance(other, DiffPoly):
            return self + self.ring.const(other)
        self._check(other)
        if len(other.terms) > len(self.terms):
            self, other = other, self
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v = v + c
                if v:
                    out[m] = v
                else:
                    del out[m]
        return DiffPoly(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return DiffPoly(self.ring, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, DiffPoly):
            return self + (-as_ratfunc(other))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "DiffPoly":
        c = as_ratfunc(c)
        if not c:
            return self.ring.zero()
        if c.is_one():
            return self
        return DiffPoly(self.ring, {m: c * v for m, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, DiffPoly):
            return self.scale(other)
        self._check(other)
        return DiffPoly(self.ring, _mul_terms(self.terms, other.terms, self.ring))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = self.ring.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # structure ---------------------------------------------------------------
    def monomials(self):
        """(exponent map, coefficient) pairs in canonical graded-lex order."""
        ring = self.ring
        out = []
        for m, c in self.terms.items():
            powers = {ring.slot_var(s): e for s, e in ring.exponents(m)}
            out.append((powers, c))
        out.sort(key=lambda pc: _mono_sort_key(pc[0]))
        return out

    def total_degree(self) -> int:
        return max((self.ring.degree(m) for m in self.terms), default=-1)

    def min_degree(self) -> int:
        return min((self.ring.degree(m) for m in self.terms), default=-1)

    def max_order(self) -> int:
        """Largest jet order occurring (-1 for a constant, including 0)."""
        ring = self.ring
        best = -1
        for m in self.terms:
            for s, _ in ring.exponents(m):
                o = ring.slot_var(s).order
                if o > best:
                    best = o
        return best

    def variables_used(self) -> set[JetVar]:
        ring = self.ring
        return {ring.slot_var(s) for m in self.terms for s, _ in ring.exponents(m)}

    def coefficient(self, powers: Mapping[JetVar, int]) -> RatFunc:
        return self.terms.get(self.ring.monomial(powers), ZERO)

    def constant_term(self) -> RatFunc:
        return self.terms.get(0, ZERO)

    def truncate(self, degree: int) -> "DiffPoly":
        ring = self.ring
        return DiffPoly(ring, {m: c for m, c in self.terms.items() if ring.degree(m) <= degree})

    def homogeneous_part(self, degree: int) -> "DiffPoly":
        ring = self.ring
        return DiffPoly(ring, {m: c for m, c in self.terms.items() if ring.degree(m) == degree})

    def map_coefficients(self, f: Callable[[RatFunc], RatFunc]) -> "DiffPoly":
        out = {}
        for m, c in self.terms.items():
            v = f(c)
            if v:
                out[m] = v
        return DiffPoly(self.ring, out)

    def in_ring(self, ring: JetRing) -> "DiffPoly":
        """Re-express in another layout (e.g. larger max order); truncates to ``ring.trunc``."""
        if ring.same_layout(self.ring):
            if ring.trunc is None or (self.ring.trunc is not None and self.ring.trunc <= ring.trunc):
                return DiffPoly(ring, self.terms)
            return DiffPoly(ring, self.truncate(ring.trunc).terms)
        src = self.ring
        out = {}
        for m, c in self.terms.items():
            if ring.trunc is not None and src.degree(m) > ring.trunc:
                continue
            powers = {}
            for s, e in src.exponents(m):
                v = src.slot_var(s)
                if ring.tensor and v.side == Side.SINGLE:
                    v = JetVar(v.gen, v.order, Side.LEFT)
                elif not ring.tensor and v.side == Side.LEFT:
                    v = JetVar(v.gen, v.order, Side.SINGLE)
                powers[v] = e
            out[ring.monomial(powers)] = c
        return DiffPoly(ring, out)

    def to_side(self, side: Side, tensor_ring: JetRing) -> "DiffPoly":
        """Copy a single-side polynomial into the Left or Right block of a tensor ring."""
        if not tensor_ring.tensor:
            raise ValueError("target must be a tensor-square ring")
        if self.ring.tensor:
            raise ValueError("source must be single-sided")
        src = self.ring
        out = {}
        for m, c in self.terms.items():
            if tensor_ring.trunc is not None and src.degree(m) > tensor_ring.trunc:
                continue
            powers = {JetVar(v.gen, v.order, side): e
                      for v, e in ((src.slot_var(s), e) for s, e in src.exponents(m))}
            out[tensor_ring.monomial(powers)] = c
        return DiffPoly(tensor_ring, out)

    # rendering -----------------------------------------------------------------
    def to_text(self) -> str:
        """Canonical text: graded-lex order, coefficients as num/den in t."""
        if not self.terms:
            return "0"
        pieces = []
        for powers, c in self.monomials():
            mono = "*".join(v.name(self.ring.names) + (f"^{e}" if e > 1 else "")
                            for v, e in sorted(powers.items(), key=lambda ve: _var_key(ve[0])))
            neg = c.num.coeffs()[-1] < 0
            mag = -c if neg else c
            cs = format_ratfunc(mag)
            if not mono:
                body = cs
            elif mag.is_one():
                body = mono
            else:
                if mag.is_polynomial() and (" " in cs):
                    cs = f"({cs})"
                body = f"{cs}*{mono}"
            pieces.append(("-" if neg else "+", body))
        out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"DiffPoly({self.to_text()})"


def _var_key(v: JetVar):
    return (int(v.side), v.gen, v.order)


def _mono_sort_key(powers: Mapping[JetVar, int]):
    deg = sum(powers.values())
    vec = tuple(sorted(((_var_key(v), e) for v, e in powers.items())))
    return (deg, vec)


def _mul_terms(a: dict[int, RatFunc], b: dict[int, RatFunc], ring: JetRing) -> dict[int, RatFunc]:
    if not a or not b:
        return {}
    if len(a) < len(b):
        a, b = b, a
    trunc = ring.trunc
    out: dict[int, RatFunc] = {}
    get = out.get
    if trunc is None:
        for m2, c2 in b.items():
            for m1, c1 in a.items():
                m = m1 + m2
                v = get(m)
                out[m] = c1 * c2 if v is None else v + c1 * c2
    else:
        limit = (trunc + 1) << ring.deg_shift
        for m2, c2 in b.items():
            for m1, c1 in a.items():
                m = m1 + m2
                if m >= limit:
                    continue
                v = get(m)
                out[m] = c1 * c2 if v is None else v + c1 * c2
    if trunc is None and any(ring.degree(m) > MAX_DEGREE for m in out):
        raise OverflowError("monomial degree exceeds packing capacity")
    return {m: c for m, c in out.items() if c}


# ---------------------------------------------------------------------------
# operations


def total_derive(p: DiffPoly, ring: JetRing | None = None) -> DiffPoly:
    """The total derivation: coefficients by d/dt, ``d^i x_j -> d^(i+1) x_j`` on every side.

    ``ring`` is the target context; it must have room for the raised orders.
    """
    src = p.ring
    if ring is not None and not ring.same_layout(src):
        p = p.in_ring(ring.with_(trunc=src.trunc if ring.trunc is None else ring.trunc))
        src = p.ring
    target = src if ring is None else src.with_(trunc=ring.trunc if ring.trunc is not None else src.trunc)
    top = src.max_order
    field = src.field
    out: dict[int, RatFunc] = {}
    units = src._slot_unit
    for m, c in p.terms.items():
        dc = derive(c, field)
        if dc:
            v = out.get(m)
            out[m] = dc if v is None else v + dc
        for s, e in src.exponents(m):
            var = src.slot_var(s)
            if var.order == top:
                raise OrderOverflow(
                    f"total derivative of {var.name()} needs order {top + 1} > {top}; "
                    "supply a ring one order higher")
            nm = m - units[s] + units[s + 1]
            inc = c if e == 1 else c * e
            v = out.get(nm)
            out[nm] = inc if v is None else v + inc
    return DiffPoly(target, {m: c for m, c in out.items() if c})


def total_derive_n(p: DiffPoly, k: int, ring: JetRing | None = None) -> DiffPoly:
    for _ in range(k):
        p = total_derive(p, ring)
    return p


def substitute(p: DiffPoly, images: Mapping[JetVar, DiffPoly], target: JetRing) -> DiffPoly:
    """Ring homomorphism sending each variable of ``p`` to its image, truncated to ``target``.

    Coefficients are carried over unchanged.
    """
    src = p.ring
    needed = p.variables_used()
    missing = [v for v in needed if v not in images]
    if missing:
        raise KeyError(f"no image for {', '.join(sorted(v.name() for v in missing))}")
    imgs = {}
    for v in needed:
        img = images[v]
        if not img.ring.same_layout(target):
            raise RingMismatch("image lives in a different ring")
        imgs[src.slot(v)] = DiffPoly(target, img.terms) if target.trunc is None else \
            DiffPoly(target, img.truncate(target.trunc).terms)
    powers: dict[tuple[int, int], DiffPoly] = {}

    def power(s: int, e: int) -> DiffPoly:
        key = (s, e)
        if key not in powers:
            powers[key] = imgs[s] if e == 1 else power(s, e - 1) * imgs[s]
        return powers[key]

    # group monomials by their leading factor to share partial products
    acc: dict[int, RatFunc] = {}
    cache: dict[tuple, DiffPoly] = {}

    def prod(exps: tuple[tuple[int, int], ...]) -> DiffPoly:
        if exps in cache:
            return cache[exps]
        if len(exps) == 1:
            r = power(*exps[0])
        else:
            r = prod(exps[:-1]) * power(*exps[-1])
        cache[exps] = r
        return r

    for m, c in p.terms.items():
        exps = src.exponents(m)
        if not exps:
            term = {0: c}
        else:
            term = prod(exps).terms
            if not c.is_one():
                term = {mm: c * v for mm, v in term.items()}
        for mm, v in term.items():
            w = acc.get(mm)
            acc[mm] = v if w is None else w + v
    return DiffPoly(target, {m: c for m, c in acc.items() if c})


def restrict_to_N(p: DiffPoly) -> DiffPoly:
    """Pullback to N^nG: every order-0 variable set to zero."""
    ring = p.ring
    return DiffPoly(ring, {m: c for m, c in p.terms.items()
                           if all(ring.slot_var(s).order > 0 for s, _ in ring.exponents(m))})


def restrict_below(p: DiffPoly, order: int) -> DiffPoly:
    """Set every variable of order < ``order`` to zero (pullback to H^nG when order = n)."""
    ring = p.ring
    return DiffPoly(ring, {m: c for m, c in p.terms.items()
                           if all(ring.slot_var(s).order >= order for s, _ in ring.exponents(m))})


def set_order0_side_zero(p: DiffPoly) -> DiffPoly:
    """Tensor-ring version of :func:`restrict_to_N`: Left and Right order-0 variables to zero."""
    return restrict_to_N(p)


def linear_part(p: DiffPoly) -> dict[JetVar, RatFunc]:
    ring = p.ring
    out = {}
    for m, c in p.terms.items():
        if ring.degree(m) == 1:
            ((s, _),) = ring.exponents(m)
            out[ring.slot_var(s)] = c
    return out


def augmentation_membership(p: DiffPoly) -> bool:
    """True iff every monomial contains an order-0 variable (p lies in the ideal (x))."""
    ring = p.ring
    for m in p.terms:
        if not any(ring.slot_var(s).order == 0 for s, _ in ring.exponents(m)):
            return False
    return True


def split_augmentation(p: DiffPoly) -> tuple[DiffPoly, DiffPoly]:
    """Split ``p = f1 + f2`` with f1 in (x) and f2 free of order-0 variables."""
    ring = p.ring
    f1, f2 = {}, {}
    for m, c in p.terms.items():
        if any(ring.slot_var(s).order == 0 for s, _ in ring.exponents(m)):
            f1[m] = c
        else:
            f2[m] = c
    return DiffPoly(ring, f1), DiffPoly(ring, f2)


def linear_form(ring: JetRing, coeffs: Mapping[JetVar, RatFunc]) -> DiffPoly:
    return ring.from_terms({((v, 1),): c for v, c in coeffs.items() if c})


def partial(p: DiffPoly, v: JetVar) -> DiffPoly:
    """Partial derivative with respect to one jet variable."""
    ring = p.ring
    s = ring.slot(v)
    unit = ring._slot_unit[s]
    out = {}
    for m, c in p.terms.items():
        e = (m >> (_BITS * s)) & _MASK
        if e:
            out[m - unit] = c * e if e > 1 else c
    return DiffPoly(ring, out)
