"""Group and scheme spec files, and the polynomial expression grammar.

Spec files are ``key = value`` lines; values are integers, double-quoted strings or
bracketed (possibly nested, possibly multi-line) lists of those.  ``#`` starts a comment.

    name = "gm"
    dim = 1
    vars = ["x0"]
    comul = ["x0 + y0 + x0*y0"]
    trunc = 8
    ext_dim = 0

Scheme files use ``kind = "scheme"``, ``vars``, ``relations`` and optionally ``points``
(a list of coordinate lists, each coordinate an expression in t).

Polynomials: integers, ``t``, variable names, ``+ - * ^`` and parentheses; ``/`` is allowed
only with a divisor free of variables.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .basefield import DEFAULT_FIELD, ONE, RatFunc, T
from .diffring import DiffPoly, JetRing, JetVar, Side
from .groups import FormalGroupLaw, check_law_axioms, default_trunc
from .hasse import AffineScheme


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int, source: str = "<input>"):
        self.message, self.line, self.col, self.source = message, line, col, source
        super().__init__(f"{source}:{line}:{col}: {message}")


# ---------------------------------------------------------------------------
# expressions

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


@dataclass
class _Tok:
    kind: str   # num, name, op, end
    text: str
    line: int
    col: int


def _tokenize(text: str, line: int, col: int) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        start = m.start(m.lastindex) if m.lastindex else m.end()
        if m.group(1):
            toks.append(_Tok("num", m.group(1), line, col + start))
        elif m.group(2):
            toks.append(_Tok("name", m.group(2), line, col + start))
        elif m.group(3):
            ch = m.group(3)
            if ch not in "+-*^()/":
                raise ParseError(f"unexpected character {ch!r}", line, col + start)
            toks.append(_Tok("op", ch, line, col + start))
        pos = m.end()
    toks.append(_Tok("end", "", line, col + len(text)))
    return toks


class _ExprParser:
    """Recursive descent: sum := term (('+'|'-') term)*, term := unary ('*' unary | '/' unary)*,
    unary := '-' unary | power, power := atom ('^' num)?, atom := num | name | '(' sum ')'."""

    def __init__(self, toks, ring: JetRing, names: dict, source: str):
        self.toks, self.pos, self.ring, self.names, self.source = toks, 0, ring, names, source

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def take(self) -> _Tok:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.line, tok.col, self.source)

    def parse(self) -> DiffPoly:
        if self.peek().kind == "end":
            self.error("empty expression")
        out = self.sum()
        if self.peek().kind != "end":
            self.error(f"unexpected {self.peek().text!r}")
        return out

    def sum(self):
        acc = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self):
        acc = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take()
            rhs = self.unary()
            if op.text == "*":
                acc = acc * rhs
            else:
                if rhs.variables_used():
                    self.error("division by an expression containing variables", op)
                c = rhs.constant_term()
                if not c:
                    self.error("division by zero", op)
                acc = acc.scale(c.inverse())
        return acc

    def unary(self):
        if self.peek().kind == "op" and self.peek().text == "-":
            self.take()
            return -self.unary()
        if self.peek().kind == "op" and self.peek().text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            tok = self.peek()
            if tok.kind != "num":
                self.error("exponent must be a non-negative integer")
            self.take()
            return base ** int(tok.text)
        return base

    def atom(self):
        tok = self.peek()
        if tok.kind == "num":
            self.take()
            return self.ring.const(int(tok.text))
        if tok.kind == "name":
            self.take()
            if tok.text == "t":
                return self.ring.const(T)
            if tok.text not in self.names:
                self.error(f"unknown variable {tok.text!r}", tok)
            return self.names[tok.text]
        if tok.kind == "op" and tok.text == "(":
            self.take()
            inner = self.sum()
            if not (self.peek().kind == "op" and self.peek().text == ")"):
                self.error("expected ')'")
            self.take()
            return inner
        if tok.kind == "end":
            self.error("unexpected end of expression")
        self.error(f"unexpected {tok.text!r}")


def parse_expression(text: str, ring: JetRing, names: dict[str, DiffPoly],
                     line: int = 1, col: int = 1, source: str = "<input>") -> DiffPoly:
    return _ExprParser(_tokenize(text, line, col), ring, names, source).parse()


def parse_ratfunc(text: str, line: int = 1, col: int = 1, source: str = "<input>") -> RatFunc:
    """An element of Q(t) such as ``t``, ``2``, ``(t+1)/(t-2)``."""
    ring = JetRing(1, 0)
    p = parse_expression(text, ring, {}, line, col, source)
    return p.constant_term()


# ---------------------------------------------------------------------------
# spec files

@dataclass
class _Value:
    value: object
    line: int
    col: int


class _FileParser:
    def __init__(self, text: str, source: str):
        self.text, self.source = text, source
        self.pos, self.line, self.col = 0, 1, 1

    def error(self, msg: str):
        raise ParseError(msg, self.line, self.col, self.source)

    def advance(self, k: int = 1):
        for _ in range(k):
            if self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def skip(self, newlines: bool):
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "#":
                while self.pos < len(self.text) and self.text[self.pos] != "\n":
                    self.advance()
            elif ch in " \t\r" or (newlines and ch == "\n"):
                self.advance()
            else:
                break

    def parse(self) -> dict[str, _Value]:
        out = {}
        while True:
            self.skip(True)
            if self.pos >= len(self.text):
                return out
            m = re.compile(r"[A-Za-z_][A-Za-z_0-9]*").match(self.text, self.pos)
            if not m:
                self.error("expected a field name")
            key, kl, kc = m.group(0), self.line, self.col
            self.advance(len(key))
            self.skip(False)
            if self.pos >= len(self.text) or self.text[self.pos] != "=":
                self.error("expected '='")
            self.advance()
            self.skip(False)
            if key in out:
                raise ParseError(f"duplicate field {key!r}", kl, kc, self.source)
            out[key] = self.value()
            self.skip(False)
            if self.pos < len(self.text) and self.text[self.pos] != "\n":
                self.error("expected end of line")

    def value(self) -> _Value:
        line, col = self.line, self.col
        if self.pos >= len(self.text):
            self.error("missing value")
        ch = self.text[self.pos]
        if ch == '"':
            self.advance()
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos] not in '"\n':
                self.advance()
            if self.pos >= len(self.text) or self.text[self.pos] != '"':
                raise ParseError("unterminated string", line, col, self.source)
            s = self.text[start:self.pos]
            self.advance()
            return _Value(s, line, col + 1)
        if ch == "[":
            self.advance()
            items = []
            while True:
                self.skip(True)
                if self.pos < len(self.text) and self.text[self.pos] == "]":
                    self.advance()
                    return _Value(items, line, col)
                items.append(self.value())
                self.skip(True)
                if self.pos < len(self.text) and self.text[self.pos] == ",":
                    self.advance()
                    continue
                if self.pos < len(self.text) and self.text[self.pos] == "]":
                    continue
                self.error("expected ',' or ']'")
        m = re.compile(r"-?\d+").match(self.text, self.pos)
        if m:
            self.advance(len(m.group(0)))
            return _Value(int(m.group(0)), line, col)
        self.error("expected a string, integer or list")


def parse_fields(text: str, source: str = "<input>") -> dict[str, _Value]:
    return _FileParser(text, source).parse()


@dataclass
class GroupSpec:
    name: str
    g: int
    vars: list
    comul: list
    trunc: int | None
    ext_dim: int | None
    right_vars: list = field(default_factory=list)


def _require(fields: dict, key: str, kind, source: str):
    if key not in fields:
        raise ParseError(f"missing field {key!r}", 1, 1, source)
    v = fields[key]
    if kind is list:
        if not isinstance(v.value, list):
            raise ParseError(f"field {key!r} must be a list", v.line, v.col, source)
    elif not isinstance(v.value, kind):
        raise ParseError(f"field {key!r} must be a {kind.__name__}", v.line, v.col, source)
    return v


def _right_name(name: str) -> str:
    return "y" + name[1:] if name.startswith("x") else name + "_r"


def group_spec_from_fields(fields: dict, source: str) -> GroupSpec:
    name = _require(fields, "name", str, source).value
    dimv = _require(fields, "dim", int, source)
    varsv = _require(fields, "vars", list, source)
    comulv = _require(fields, "comul", list, source)
    names = []
    for item in varsv.value:
        if not isinstance(item.value, str) or not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", item.value) \
                or item.value == "t":
            raise ParseError("variable names must be identifiers other than 't'", item.line, item.col, source)
        names.append(item.value)
    if dimv.value < 1 or dimv.value != len(names):
        raise ParseError(f"dim = {dimv.value} but {len(names)} variables given", dimv.line, dimv.col, source)
    if len(comulv.value) != len(names):
        raise ParseError(f"need {len(names)} comultiplication polynomials", comulv.line, comulv.col, source)
    if "rvars" in fields:
        rv = [v.value for v in _require(fields, "rvars", list, source).value]
    else:
        rv = [_right_name(n) for n in names]
    if len(set(names + rv)) != 2 * len(names):
        raise ParseError("left and right variable names must be distinct", varsv.line, varsv.col, source)
    trunc = _require(fields, "trunc", int, source).value if "trunc" in fields else None
    ext = _require(fields, "ext_dim", int, source).value if "ext_dim" in fields else None
    for c in comulv.value:
        if not isinstance(c.value, str):
            raise ParseError("comultiplication entries must be strings", c.line, c.col, source)
    return GroupSpec(name, len(names), names, comulv.value, trunc, ext, rv)


def build_group(spec: GroupSpec, source: str = "<input>") -> FormalGroupLaw:
    """Parse the comultiplication polynomials and validate the law axioms."""
    g = spec.g
    full = JetRing(g, 0, None, True, DEFAULT_FIELD, tuple(spec.vars))
    table = {}
    for j, n in enumerate(spec.vars):
        table[n] = full.var(j, 0, Side.LEFT)
    for j, n in enumerate(spec.right_vars):
        table[n] = full.var(j, 0, Side.RIGHT)
    polys = [parse_expression(c.value, full, table, c.line, c.col, source) for c in spec.comul]
    deg = max(p.total_degree() for p in polys)
    D = spec.trunc if spec.trunc is not None else max(default_trunc(), deg)
    if D < 2:
        raise ParseError("trunc must be at least 2", 1, 1, source)
    if deg > D:
        raise ParseError(f"trunc = {D} is below the degree {deg} of the law", 1, 1, source)
    ring = JetRing(g, 0, D, True, DEFAULT_FIELD, tuple(spec.vars))
    comul = tuple(p.in_ring(ring) for p in polys)
    G = FormalGroupLaw(spec.name, g, comul, D, True, DEFAULT_FIELD, spec.ext_dim,
                       tuple(spec.vars) if spec.vars != [f"x{j}" for j in range(g)] else None)
    check_law_axioms(G)
    return G


def build_scheme(fields: dict, source: str = "<input>") -> tuple[AffineScheme, list]:
    varsv = _require(fields, "vars", list, source)
    relv = _require(fields, "relations", list, source)
    names = [v.value for v in varsv.value]
    ring = JetRing(len(names), 0, None, False, DEFAULT_FIELD, tuple(names))
    table = {n: ring.var(j) for j, n in enumerate(names)}
    rels = [parse_expression(r.value, ring, table, r.line, r.col, source) for r in relv.value]
    points = []
    if "points" in fields:
        for pt in _require(fields, "points", list, source).value:
            if not isinstance(pt.value, list) or len(pt.value) != len(names):
                raise ParseError(f"each point needs {len(names)} coordinates", pt.line, pt.col, source)
            points.append({j: parse_ratfunc(c.value, c.line, c.col, source) for j, c in enumerate(pt.value)})
    return AffineScheme(names, rels), points


def load_spec(path: str | Path):
    """A FormalGroupLaw or an (AffineScheme, points) pair, depending on the file's ``kind``."""
    path = Path(path)
    text = path.read_text()
    fields = parse_fields(text, str(path))
    kind = fields.get("kind")
    if kind is not None and kind.value == "scheme":
        return build_scheme(fields, str(path))
    if kind is not None and kind.value != "group":
        raise ParseError(f"unknown kind {kind.value!r}", kind.line, kind.col, str(path))
    return build_group(group_spec_from_fields(fields, str(path)), str(path))


def parse_group_text(text: str, source: str = "<input>") -> FormalGroupLaw:
    return build_group(group_spec_from_fields(parse_fields(text, source), source), source)
