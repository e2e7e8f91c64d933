"""jetchar command line: analyze, verify, oracle jets, groups list.

Exit codes: 0 success, 1 invariant violation or failed suite, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import __version__
from .basefield import format_ratfunc
from .characters import InvariantViolation, TruncationError, character_space, dim_formula
from .groups import FormalGroupLaw, LawAxiomError, catalog, check_lambda
from .hasse import (OracleMismatch, jet_point_oracle, legendre_base_points, legendre_curve,
                    perturb_jet, solve_jet)
from .kernel import vectorial_extension_report
from .parser import ParseError, load_spec, parse_ratfunc

SCHEMA_VERSION = 1

GROUPS = [
    ("ga", "additive group G_a", 1, 0),
    ("gm", "multiplicative group G_m", 1, 0),
    ("ga*gm", "G_a x G_m", 2, 0),
    ("ga^2*gm", "G_a^2 x G_m", 3, 0),
    ("legendre", "Legendre elliptic curve y^2 = x(x-1)(x-lambda), default lambda = t", 1, 1),
]


class InputError(Exception):
    """Bad command-line input; exit code 2."""


def _dump(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if path is None:
        return
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def resolve_group(args) -> FormalGroupLaw:
    if args.trunc is not None and args.trunc < 2:
        raise InputError("--trunc must be at least 2")
    if args.spec:
        if args.group:
            raise InputError("give either a group name or --spec, not both")
        G = load_spec(args.spec)
        if not isinstance(G, FormalGroupLaw):
            raise InputError(f"{args.spec} describes a scheme, not a group")
        return G.with_trunc(args.trunc) if args.trunc is not None else G
    if not args.group:
        raise InputError("a group name or --spec is required")
    lam = None
    if args.lam is not None:
        if args.group.strip().lower() != "legendre":
            raise InputError("--lambda only applies to legendre")
        try:
            lam = check_lambda(parse_ratfunc(args.lam, source="--lambda"))
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    try:
        return catalog(args.group, args.trunc, lam)
    except KeyError as exc:
        raise InputError(exc.args[0]) from exc


def analyze(G: FormalGroupLaw, N: int | None) -> dict:
    """Run the groups -> characters -> kernel pipeline and collect the report."""
    if N is not None and N < 0:
        raise InputError("--max-order must be >= 0")
    violations = []
    space = character_space(G, N)
    N = space.N
    orders = [{"n": n, "dimX": space.dimX[n], "l": space.l[n], "h": space.h[n]} for n in range(N + 1)]
    for n in range(N + 1):
        if space.dimX[n] != dim_formula(space.l, n):
            violations.append(f"dim-formula: dimX[{n}] = {space.dimX[n]} != {dim_formula(space.l, n)}")
    r = G.declared_r
    bound = None
    if r is not None and space.m_u is not None:
        bound = {"declared_r": r, "m_u": space.m_u, "holds": space.m_u <= r + 1}
        if not bound["holds"]:
            violations.append(f"order-bound: m_u = {space.m_u} > r + 1 = {r + 1}")
    pb = space.primitive
    primitive = None
    kernel = None
    A = None
    if pb is not None:
        primitive = [{"order": o, "character": ch.to_text()} for o, ch in zip(pb.orders, pb.characters)]
        A = [[format_ratfunc(a) for a in row] for row in pb.A]
        rep = vectorial_extension_report(G, pb)
        violations.extend(rep.violations)
        kernel = rep.to_json()
    return {
        "schema_version": SCHEMA_VERSION,
        "engine_version": __version__,
        "group": {"name": G.name, "g": G.g, "exact": G.exact, "trunc": G.trunc, "declared_r": r},
        "max_order": N,
        "orders": orders,
        "m_l": space.m_l,
        "m_u": space.m_u,
        "saturated": space.saturated,
        "primitive_basis": primitive,
        "A": A,
        "r_bound": bound,
        "truncation": {"checked": space.stable is not None, "stable": space.stable,
                       "compared": [G.trunc, G.trunc + 2] if space.stable is not None else None},
        "kernel": kernel,
        "violations": violations,
    }


def summarize(rep: dict) -> str:
    g = rep["group"]
    lines = [f"group {g['name']}  g = {g['g']}  D = {g['trunc']}  declared r = {g['declared_r']}"]
    lines.append("dimX = " + str([o["dimX"] for o in rep["orders"]])
                 + "  l = " + str([o["l"] for o in rep["orders"]])
                 + "  h = " + str([o["h"] for o in rep["orders"]]))
    lines.append(f"m_l = {rep['m_l']}  m_u = {rep['m_u']}  saturated = {rep['saturated']}")
    if rep["r_bound"]:
        lines.append(f"m_u <= r + 1: {rep['r_bound']['holds']}")
    if rep["truncation"]["checked"]:
        lines.append(f"truncation stable (D vs D+2): {rep['truncation']['stable']}")
    if not rep["saturated"]:
        lines.append("not saturated: raise --max-order to find all primitive characters")
    if rep["A"] is not None:
        lines.append("A = " + str(rep["A"]))
    k = rep["kernel"]
    if k is not None:
        if k["degenerate"]:
            lines.append("kernel: degenerate (m = 0)")
        else:
            lines.append(f"m = {k['m']}  dimK = {k['dimK']}  dimL = {k['dimL']}")
    for v in rep["violations"]:
        lines.append(f"VIOLATION {v}")
    return "\n".join(lines)


def cmd_analyze(args) -> int:
    G = resolve_group(args)
    try:
        rep = analyze(G, args.max_order)
    except (InvariantViolation, TruncationError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 1
    print(summarize(rep))
    _dump(rep, args.json)
    return 1 if rep["violations"] else 0


def cmd_verify(args) -> int:
    from .verify import run_suite
    results = run_suite(args.suite, args.seed)
    bad = 0
    for res in results:
        print(f"{res.suite}: {res.cases} cases, {len(res.failures)} failures")
        for f in res.failures:
            bad += 1
            print(f"  [{f.invariant}] case {f.case} seed {f.seed}: {f.detail.splitlines()[0]}")
    _dump({"schema_version": SCHEMA_VERSION, "engine_version": __version__, "seed": args.seed,
           "suites": [r.to_json() for r in results]}, args.json)
    return 1 if bad else 0


def cmd_oracle_jets(args) -> int:
    if args.max_order < 0:
        raise InputError("--max-order must be >= 0")
    if args.spec:
        loaded = load_spec(args.spec)
        if isinstance(loaded, FormalGroupLaw):
            raise InputError(f"{args.spec} describes a group, not a scheme")
        X, points = loaded
        if not points:
            raise InputError(f"{args.spec} lists no base points")
    else:
        X, points = legendre_curve(), legendre_base_points()
    rng = random.Random(args.seed)
    records = []
    failed = 0
    for k in range(args.trials):
        n = rng.randint(1, args.max_order) if args.max_order >= 1 else 0
        base = points[rng.randrange(len(points))]
        try:
            vals, piv = solve_jet(X, n, base, rng)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        for kind, jet in (("valid", vals), ("invalid", perturb_jet(vals, piv, rng) if piv else None)):
            if jet is None:
                continue
            rec = {"trial": k, "n": n, "kind": kind}
            try:
                verdict = jet_point_oracle(X, n, jet)
                rec["verdict"] = verdict
                rec["pass"] = verdict == (kind == "valid")
            except OracleMismatch as exc:
                rec["verdict"] = None
                rec["pass"] = False
                rec["detail"] = str(exc)
            failed += not rec["pass"]
            records.append(rec)
    print(f"oracle jets: {len(records)} records, {failed} failures")
    _dump({"schema_version": SCHEMA_VERSION, "engine_version": __version__, "seed": args.seed,
           "records": records}, args.json)
    return 1 if failed else 0


def cmd_groups_list(args) -> int:
    for name, desc, g, r in GROUPS:
        print(f"{name:10s} g = {g}  r = {r}  {desc}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jetchar", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"jetchar {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="character spaces, primitive basis and kernel of a group")
    a.add_argument("group", nargs="?", help="catalog name (see `groups list`)")
    a.add_argument("--spec", help="group spec file instead of a catalog name")
    a.add_argument("--lambda", dest="lam", help="Legendre parameter, a rational function of t")
    a.add_argument("--max-order", type=int, default=None, help="highest jet order N")
    a.add_argument("--trunc", type=int, default=None, help="truncation degree D")
    a.add_argument("--seed", type=int, default=0, help="unused by analyze; accepted for symmetry")
    a.add_argument("--json", help="write the JSON report here ('-' for stdout)")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="randomized property suites")
    v.add_argument("--suite", default="all",
                   choices=["field", "ring", "oracle", "groups", "characters", "kernel", "all"])
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--json", help="write suite results here ('-' for stdout)")
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="independent oracles")
    osub = o.add_subparsers(dest="oracle", required=True)
    j = osub.add_parser("jets", help="compare prolonged-ideal and D_n(K) membership of random jets")
    j.add_argument("--spec", help="scheme spec file (default: the Legendre curve over Q(t))")
    j.add_argument("--max-order", type=int, default=3)
    j.add_argument("--trials", type=int, default=100)
    j.add_argument("--seed", type=int, default=0)
    j.add_argument("--json", help="write per-trial records here ('-' for stdout)")
    j.set_defaults(func=cmd_oracle_jets)

    g = sub.add_parser("groups", help="catalog")
    gsub = g.add_subparsers(dest="groups", required=True)
    gl = gsub.add_parser("list", help="list catalog groups")
    gl.set_defaults(func=cmd_groups_list)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except LawAxiomError as exc:
        print(f"invalid group law: {exc}", file=sys.stderr)
        return 2
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
