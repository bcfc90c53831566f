"""Command-line front-end: every test in the library as a subcommand.

Output is a stable JSON envelope under --json (schema tag "mage/1") or
human-readable key/value lines by default.  Exit codes: 0 success, 2 usage
errors, 3 parse or math-domain errors.  All numbers are printed exactly as
"a/b" strings; floating approximations appear only under --approx.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from .bgg import bgg_apply, kernel_basis
from .conformal import (
    conformal_check,
    fundamental_forms,
    graph_fundamental_forms,
    hyperplane_test,
    phi_obstruction,
    sp6_generators,
    sp6_rank,
    stretching_field,
)
from .exprparse import ParseError, format_rf, parse_expression, point_from_string
from .lgrass import LagrangianPlane, minors_chart, rank_one_line
from .poly import MageError, MultiPoly
from .symbols import (
    PDEFunction,
    check_quasilinear_system,
    classify,
    exceptionality_at_roots,
    is_completely_exceptional,
    iterated_symbol,
    symbol,
)

SCHEMA = "mage/1"


def _read_expr(arg: str) -> str:
    if arg.startswith("@"):
        with open(arg[1:], "r", encoding="utf-8") as fh:
            return fh.read()
    return arg


def _pde(args) -> PDEFunction:
    return PDEFunction(args.n, parse_expression(_read_expr(args.expr), args.n))


def _cmd_classify(args) -> dict:
    point = point_from_string(args.point) if args.point else None
    res = classify(_pde(args), point)
    payload: dict = {"type": res.type, "delta": _fmt(res.delta)}
    if res.roots is None:
        payload["roots"] = None
    elif res.roots_exact:
        payload["roots"] = [str(r) for r in res.roots]
    elif args.approx:
        payload["roots"] = [repr(float(r)) for r in res.roots]
        payload["roots_precision"] = "float64 (inexact)"
    else:
        payload["roots"] = None
        payload["note"] = "roots are irrational; pass --approx for float approximations"
    return payload


def _cmd_symbol(args) -> dict:
    F = _pde(args)
    if args.r and args.r > 1:
        return iterated_symbol(F, args.r).to_json()
    return symbol(F).to_json()


def _cmd_is_ma(args) -> dict:
    return is_completely_exceptional(_pde(args)).to_json()


def _cmd_check_system(args) -> dict:
    h = parse_expression(_read_expr(args.expr), 2)
    r1, r2 = check_quasilinear_system(h)
    return {
        "residuals": [_fmt(r1), _fmt(r2)],
        "exceptional": r1.is_zero() and r2.is_zero(),
    }


def _cmd_fundamental_forms(args) -> dict:
    n = args.n
    h = parse_expression(_read_expr(args.expr), n)
    lam = parse_expression(args.conformal, n) if args.conformal else None
    I, II, tf = graph_fundamental_forms(n, h, lam=lam, normal=args.normal)
    return {
        "I": I.to_json(),
        "II": II.to_json(),
        "traceFreeII": tf.to_json() if tf is not None else None,
    }


def _cmd_hyperplane_test(args) -> dict:
    return {"hyperplane_section": hyperplane_test(_pde(args))}


def _cmd_bgg_kernel(args) -> dict:
    kb = kernel_basis(args.n, args.r, cap=args.cap)
    return kb.to_json()


def _cmd_bgg_apply(args) -> dict:
    f = parse_expression(_read_expr(args.expr), args.n)
    if not f.is_poly():
        raise MageError("the operator applies to polynomial inputs")
    return bgg_apply(f.as_poly(), args.n, args.r).to_json()


def _cmd_pluecker(args) -> dict:
    point = point_from_string(args.point)
    L = LagrangianPlane.from_point(args.n, point)
    return minors_chart(L).to_json()


def _cmd_rank_one_line(args) -> dict:
    point = point_from_string(args.point)
    L = LagrangianPlane.from_point(args.n, point)
    xi = [Fraction(x.strip()) for x in args.xi.split(",")]
    line = rank_one_line(L, xi)
    return {
        "affine": line.affine,
        "degenerate": line.degenerate,
        "coords": [
            {"rows": list(k[0]), "cols": list(k[1]), "value": format_rf(line.coords[k])}
            for k in sorted(line.coords, key=lambda key: (len(key[0]), key))
        ],
    }


def _cmd_sp6_check(args) -> dict:
    gens = sp6_generators()
    rows = []
    for g in gens:
        res = conformal_check(g)
        rows.append({
            "generator": g.name,
            "mu": format_rf(res.mu) if res.mu is not None else None,
            "conformal": res.ok,
        })
    stretch = conformal_check(stretching_field(3))
    return {
        "generators": rows,
        "all_conformal": all(r["conformal"] for r in rows),
        "rank": sp6_rank(),
        "stretching_mu": format_rf(stretch.mu) if stretch.mu is not None else None,
    }


def _cmd_phi(args) -> dict:
    return phi_obstruction(_pde(args)).to_json()


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, MultiPoly):
        return format_rf(x)
    return format_rf(x)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mage", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, n=True, expr=False, r=False, point=False):
        if n:
            p.add_argument("--n", type=int, required=True, help="number of independent variables")
        if expr:
            p.add_argument("--expr", type=str, required=True, help="expression text or @file")
        if r:
            p.add_argument("--r", type=int, default=1, help="section degree / iteration order")
        if point:
            p.add_argument("--point", type=str, default="", help='rational point "p11=1/2,p12=3"')
        p.add_argument("--json", action="store_true", help="emit the JSON envelope")
        p.add_argument("--approx", action="store_true", help="allow float approximations")

    p = sub.add_parser("classify", help="discriminant type of an n=2 equation")
    common(p, expr=True)
    p.add_argument("--point", type=str, default="", help="optional evaluation point")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("symbol", help="(iterated) symbol of a chart function")
    common(p, expr=True)
    p.add_argument("--r", type=int, default=1, help="iteration order k (degree 2k)")
    p.set_defaults(func=_cmd_symbol)

    p = sub.add_parser("is-ma", help="Monge-Ampere / complete-exceptionality test")
    common(p, expr=True)
    p.set_defaults(func=_cmd_is_ma)

    p = sub.add_parser("check-system", help="quasilinear residual pair for p22 = h")
    common(p, n=False, expr=True)
    p.set_defaults(func=_cmd_check_system)

    p = sub.add_parser("fundamental-forms", help="I, II, trace-free II of p_nn = h")
    common(p, expr=True)
    p.add_argument("--conformal", type=str, default="", help="rescale metric by e^(2*lambda)")
    p.add_argument("--normal", choices=["chart", "reference"], default="chart")
    p.set_defaults(func=_cmd_fundamental_forms)

    p = sub.add_parser("hyperplane-test", help="is {F=0} a hyperplane section?")
    common(p, expr=True)
    p.set_defaults(func=_cmd_hyperplane_test)

    p = sub.add_parser("bgg-kernel", help="polynomial kernel of the order-(r+1) operator")
    common(p, r=True)
    p.add_argument("--cap", type=int, default=20000, help="column guard for the monomial space")
    p.set_defaults(func=_cmd_bgg_kernel)

    p = sub.add_parser("bgg-apply", help="apply the order-(r+1) operator to a polynomial")
    common(p, expr=True, r=True)
    p.set_defaults(func=_cmd_bgg_apply)

    p = sub.add_parser("pluecker", help="all minors of a rational symmetric matrix")
    common(p, point=True)
    p.set_defaults(func=_cmd_pluecker)

    p = sub.add_parser("rank-one-line", help="Plucker image of P + t*xi*xi^T")
    common(p, point=True)
    p.add_argument("--xi", type=str, required=True, help='covector "1,-2/3"')
    p.set_defaults(func=_cmd_rank_one_line)

    p = sub.add_parser("sp6-check", help="conformal factor of the 21 symmetry generators (n=3)")
    common(p, n=False)
    p.set_defaults(func=_cmd_sp6_check)

    p = sub.add_parser("phi", help="the obstruction tensor of a graph equation")
    common(p, expr=True)
    p.set_defaults(func=_cmd_phi)

    return ap


def _render_human(payload, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(payload, dict):
        lines = []
        for k, v in payload.items():
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}{k}:")
                lines.append(_render_human(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {v}")
        return "\n".join(lines)
    if isinstance(payload, list):
        return "\n".join(
            _render_human(v, indent) if isinstance(v, (dict, list)) else f"{pad}- {v}"
            for v in payload
        )
    return f"{pad}{payload}"


def run(argv: list[str]) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    t0 = time.monotonic()
    try:
        payload = args.func(args)
    except (MageError, ParseError, ZeroDivisionError, ValueError) as exc:
        ms = int((time.monotonic() - t0) * 1000)
        if getattr(args, "json", False):
            envelope = {
                "schema": SCHEMA,
                "command": args.command,
                "status": "error",
                "error": str(exc),
                "timing_ms": ms,
            }
            print(json.dumps(envelope, indent=2))
        else:
            print(f"error: {exc}", file=sys.stderr)
        return 3
    ms = int((time.monotonic() - t0) * 1000)
    if args.json:
        envelope = {
            "schema": SCHEMA,
            "command": args.command,
            "status": "ok",
            "payload": payload,
            "timing_ms": ms,
        }
        print(json.dumps(envelope, indent=2))
    else:
        print(_render_human(payload))
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
