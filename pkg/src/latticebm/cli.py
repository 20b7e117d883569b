"""Command-line front end.

Exit codes: 0 the inequality holds, 1 it is violated (or a worked example
failed), 2 malformed input or a failed hypothesis, 3 a scan found a
violation on inputs covered by a theorem.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Sequence

from .exactnum import INF, format_rational, parse_exponent, parse_rational
from .functions import CubeSpec, parse_cube
from .search import KINDS, SCANNABLE, InstanceFamily, repro_paper, repro_table, scan
from .serialize import load_function, load_set, set_to_json
from .sets import LatticeBasis, SetExpr, intersect
from .verifiers import (
    Certificate,
    PreconditionError,
    Verdict,
    VerifyRequest,
    riemann_limit_demo,
    union_volume,
    verify_bbl,
    verify_bm,
    verify_bm_pmean,
    verify_card_sum,
    verify_hks,
    verify_hks_sqrt,
    verify_lemma_ell,
    verify_trivial_card,
)

GEOMETRIC = ("main_bm", "rational_dilation", "half_sum", "naive", "custom", "bm_pmean")
VERIFIABLE = GEOMETRIC + ("lemma_ell", "bbl", "hks", "hks_sqrt", "card_sum", "trivial_card")

EXIT_HOLDS, EXIT_VIOLATED, EXIT_INPUT, EXIT_SCAN = 0, 1, 2, 3


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _exponent(text: str):
    try:
        return parse_exponent(text)
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _triple(text: str) -> tuple[int, int, int]:
    try:
        m, p, q = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected m,p,q integers, got {text!r}") from None
    return m, p, q


def _cube(text: str) -> CubeSpec:
    try:
        return parse_cube(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _basis(text: str) -> LatticeBasis:
    """Rows separated by ';', entries by ','; e.g. ``2,0;0,2``."""
    try:
        return LatticeBasis(tuple(tuple(parse_rational(c) for c in row.split(",")) for row in text.split(";")))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad basis {text!r}: {exc}") from None


def _rationals(text: str) -> list[Fraction]:
    return [_rational(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latticebm",
                                     description="Exact checks of discrete Brunn-Minkowski type inequalities.")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="check one inequality on given sets or functions")
    v.add_argument("--theorem", required=True, choices=VERIFIABLE)
    v.add_argument("--K", help="JSON set K (or A for the cardinality bounds)")
    v.add_argument("--L", help="JSON set L (or B for the cardinality bounds)")
    v.add_argument("--A", help="alias of --K")
    v.add_argument("--B", help="alias of --L")
    v.add_argument("--M", help="JSON set M for lemma_ell")
    v.add_argument("--window", help="JSON set bounding the supports for hks")
    for name in ("f", "g", "h", "k"):
        v.add_argument(f"--{name}", help=f"JSON function {name}")
    v.add_argument("--lambda", dest="lam", type=_rational)
    v.add_argument("--p", type=_exponent, default=INF, help="exponent: rational, 'inf' or '-inf'")
    v.add_argument("--mpq", type=_triple, help="m,p,q for rational_dilation")
    v.add_argument("--corrector", type=_cube, help="e.g. open_sym:1, closed_unit, interval:[-1/2,1)")
    v.add_argument("--basis", type=_basis, help="lattice basis for bbl, rows split by ';'")
    v.add_argument("--unguarded", action="store_true", help="half_sum without requiring G(K)G(L)>0")
    v.add_argument("--format", choices=("json", "text"), default="json")

    s = sub.add_parser("scan", help="run a verifier over random instances")
    s.add_argument("--theorem", required=True, choices=SCANNABLE)
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--kind", choices=KINDS, default="lattice_points")
    s.add_argument("--window", type=int, default=6)
    s.add_argument("--density", type=float, default=0.3)
    s.add_argument("--max-points", type=int)
    s.add_argument("--max-boxes", type=int, default=3)
    s.add_argument("--denominator-bound", type=int, default=4)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--count", type=int, default=100)
    s.add_argument("--lambdas", type=_rationals, default=[Fraction(1, 3), Fraction(1, 2), Fraction(2, 3)])
    s.add_argument("--p", type=_exponent, default=INF)
    s.add_argument("--mpq", type=_triple)
    s.add_argument("--corrector", type=_cube)
    s.add_argument("--unguarded", action="store_true")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--format", choices=("json", "text"), default="json")

    r = sub.add_parser("repro", help="replay the worked examples")
    r.add_argument("--check", action="append", help="run only the named check (repeatable)")
    r.add_argument("--format", choices=("json", "text"), default="text")

    d = sub.add_parser("demo-limit", help="dyadic lower sums of a box union")
    d.add_argument("--set", required=True, dest="f_set", help="JSON box union")
    d.add_argument("--window", help="JSON box window; defaults to [-m,m]^n")
    d.add_argument("--m", type=int, default=1)
    d.add_argument("--k-max", type=int, default=10)
    d.add_argument("--format", choices=("json", "text"), default="text")
    return parser


def _need(args, name: str):
    value = getattr(args, name)
    if value is None:
        flag = "lambda" if name == "lam" else name
        raise PreconditionError(f"--{flag} is required for theorem {args.theorem}")
    return value


def _sets(args) -> tuple[SetExpr, SetExpr]:
    K = args.K or args.A
    L = args.L or args.B
    if K is None or L is None:
        raise PreconditionError(f"--K and --L are required for theorem {args.theorem}")
    return load_set(K), load_set(L)


def _verify(args) -> Certificate:
    tid = args.theorem
    if tid in GEOMETRIC:
        K, L = _sets(args)
        req = VerifyRequest(K, L, args.lam, tid, args.p, args.corrector, args.mpq, args.unguarded)
        return verify_bm_pmean(req) if tid == "bm_pmean" else verify_bm(req)
    if tid == "lemma_ell":
        K, L = _sets(args)
        return verify_lemma_ell(K, L, load_set(_need(args, "M")), _need(args, "lam"))
    if tid == "bbl":
        K, L = _sets(args)
        f, g, h = (load_function(_need(args, c)) for c in "fgh")
        return verify_bbl(f, g, h, K, L, _need(args, "lam"), args.p, args.basis)
    if tid == "hks":
        f, g, h, k = (load_function(_need(args, c)) for c in "fghk")
        lam = args.lam if args.lam is not None else Fraction(1, 2)
        return verify_hks(f, g, h, k, lam, load_set(_need(args, "window")))
    if tid == "hks_sqrt":
        return verify_hks_sqrt(*_sets(args))
    A, B = _sets(args)
    return (verify_card_sum if tid == "card_sum" else verify_trivial_card)(A, B)


def certificate_text(cert: Certificate) -> str:
    lines = [f"theorem: {cert.theorem_id}", f"verdict: {cert.verdict.value}",
             f"lhs: {cert.lhs}", f"  approx {cert.lhs.approx(20)}",
             f"rhs: {cert.rhs}", f"  approx {cert.rhs.approx(20)}"]
    if cert.witness:
        lines.append("witness: " + ", ".join(f"{k}={v}" for k, v in cert.witness.items()))
    return "\n".join(lines)


def _emit(obj, fmt: str, text: str) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True) if fmt == "json" else text)


def _cmd_verify(args) -> int:
    cert = _verify(args)
    _emit(cert.to_json(), args.format, certificate_text(cert))
    return EXIT_VIOLATED if cert.verdict is Verdict.VIOLATED else EXIT_HOLDS


def _cmd_scan(args) -> int:
    family = InstanceFamily(args.n, args.window, args.kind, args.density, args.max_points,
                            args.max_boxes, args.denominator_bound, args.seed)
    report = scan(family, args.lambdas, args.theorem, args.count, args.p, args.mpq,
                  args.corrector, args.unguarded, args.workers)
    _emit(report.to_json(), args.format, report.to_text())
    return EXIT_SCAN if report.unexpected_violations else EXIT_HOLDS


def _cmd_repro(args) -> int:
    try:
        results = repro_paper(args.check)
    except KeyError as exc:
        raise PreconditionError(str(exc.args[0])) from None
    obj = [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results]
    _emit(obj, args.format, repro_table(results))
    return EXIT_HOLDS if all(r.passed for r in results) else EXIT_VIOLATED


def _cmd_demo(args) -> int:
    S = load_set(args.f_set)
    window = load_set(args.window) if args.window else SetExpr.cube(-args.m, args.m, S.dim)
    seq = riemann_limit_demo(S, window, args.k_max)
    volume = union_volume(intersect(S, window))
    obj = {"set": set_to_json(S), "volume": format_rational(volume),
           "lower_sums": [[k, format_rational(v)] for k, v in seq]}
    text = "\n".join([f"k={k:<3d} {format_rational(v):>16s}  approx {float(v):.12f}" for k, v in seq]
                     + [f"volume {format_rational(volume)}"])
    _emit(obj, args.format, text)
    return EXIT_HOLDS


COMMANDS = {"verify": _cmd_verify, "scan": _cmd_scan, "repro": _cmd_repro, "demo-limit": _cmd_demo}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return EXIT_INPUT if exc.code else EXIT_HOLDS
    try:
        return COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:  # FormatError and PreconditionError included
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())



if __name__ == "__main__":
    main()
