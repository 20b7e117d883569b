"""Random instance generation, inequality scans and the worked-example table.

Randomness comes from numpy's ``SeedSequence``: instance ``i`` of a family
with seed ``s`` is drawn from ``PCG64(SeedSequence(s).spawn(count)[i])``, so
every instance can be regenerated on its own and scans can be split across
processes without changing their results.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .exactnum import (
    INF,
    ExtendedExponent,
    RadicalSum,
    Relation,
    compare,
    format_rational,
)
from .functions import CubeSpec
from .serialize import set_to_json
from .sets import Box, Interval1D, SetExpr, count_lattice, lattice_points
from .verifiers import (
    Certificate,
    PreconditionError,
    Verdict,
    VerifyRequest,
    riemann_limit_demo,
    verify_bm,
    verify_bm_pmean,
    verify_card_sum,
    verify_hks_sqrt,
    verify_lemma_ell,
    verify_trivial_card,
)

KINDS = ("lattice_points", "box_union")


@dataclass(frozen=True)
class InstanceFamily:
    """Random pairs ``(K, L)`` inside ``[-window, window]^n``.

    ``lattice_points`` keeps each integer point with probability ``density``
    and then, if ``max_points`` is set, a random subset of at most that many.
    ``box_union`` draws up to ``max_boxes`` boxes with endpoints in
    ``(1/denominator_bound) Z`` and random open/closed ends.
    """

    n: int
    window: int = 6
    kind: str = "lattice_points"
    density: float = 0.3
    max_points: int | None = None
    max_boxes: int = 3
    denominator_bound: int = 4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1 or self.window < 0:
            raise ValueError("need n >= 1 and a non-negative window")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if not 0 < self.density <= 1:
            raise ValueError("density must lie in (0, 1]")
        if self.denominator_bound < 1 or self.max_boxes < 1:
            raise ValueError("denominator_bound and max_boxes must be at least 1")
        if self.max_points is not None and self.max_points < 1:
            raise ValueError("max_points must be at least 1")


def _random_points(rng: np.random.Generator, fam: InstanceFamily) -> SetExpr:
    side = 2 * fam.window + 1
    grid = np.indices((side,) * fam.n).reshape(fam.n, -1).T - fam.window
    keep = grid[rng.random(len(grid)) < fam.density]
    if len(keep) == 0:
        keep = grid[[rng.integers(len(grid))]]
    if fam.max_points is not None and len(keep) > fam.max_points:
        keep = keep[np.sort(rng.choice(len(keep), fam.max_points, replace=False))]
    return SetExpr.from_points([tuple(int(c) for c in p) for p in keep], fam.n)


def _random_boxes(rng: np.random.Generator, fam: InstanceFamily) -> SetExpr:
    d = fam.denominator_bound
    boxes = []
    for _ in range(int(rng.integers(1, fam.max_boxes + 1))):
        factors = []
        for _ in range(fam.n):
            a, b = sorted(int(v) for v in rng.integers(-fam.window * d, fam.window * d + 1, size=2))
            lo_open, hi_open = (bool(v) for v in rng.random(2) < 0.25)
            if a == b:
                lo_open = hi_open = False
            factors.append(Interval1D(Fraction(a, d), Fraction(b, d), lo_open, hi_open))
        boxes.append(Box(tuple(factors)))
    return SetExpr.from_boxes(boxes)


def instance(family: InstanceFamily, rng: np.random.Generator) -> tuple[SetExpr, SetExpr]:
    draw = _random_points if family.kind == "lattice_points" else _random_boxes
    return draw(rng, family), draw(rng, family)


def generate(family: InstanceFamily, count: int) -> list[tuple[SetExpr, SetExpr]]:
    """``count`` reproducible pairs ``(K, L)``."""
    if count < 1:
        raise ValueError("count must be at least 1")
    children = np.random.SeedSequence(family.seed).spawn(count)
    return [instance(family, np.random.Generator(np.random.PCG64(c))) for c in children]


# ---------------------------------------------------------------------------
# Scans
# ---------------------------------------------------------------------------

#: theorems whose verifiers must never report a violation on generated inputs
COVERED = frozenset({"main_bm", "bm_pmean", "rational_dilation", "half_sum",
                     "card_sum", "trivial_card", "hks_sqrt"})
SCANNABLE = tuple(sorted(COVERED | {"naive", "custom"}))


@dataclass
class ScanReport:
    theorem_id: str
    covered: bool
    instances_run: int = 0
    skipped: int = 0
    min_slack: dict | None = None
    equality_instances: list[dict] = field(default_factory=list)
    violations: list[dict] = field(default_factory=list)

    @property
    def unexpected_violations(self) -> list[dict]:
        return self.violations if self.covered else []

    def to_json(self) -> dict:
        return {"theorem": self.theorem_id, "covered": self.covered,
                "instances_run": self.instances_run, "skipped": self.skipped,
                "min_slack": self.min_slack, "equality_instances": self.equality_instances,
                "violations": self.violations}

    def to_text(self) -> str:
        rows = [("theorem", self.theorem_id),
                ("covered by a theorem", "yes" if self.covered else "no"),
                ("instances run", str(self.instances_run)),
                ("skipped (hypotheses fail)", str(self.skipped)),
                ("equality instances", str(len(self.equality_instances))),
                ("violations", str(len(self.violations)))]
        if self.min_slack is not None:
            c = self.min_slack["certificate"]
            rows.append(("smallest slack", f"{_show(c['lhs'])} vs {_show(c['rhs'])} ({c['verdict']})"))
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def _show(value_json: dict) -> str:
    from .exactnum import value_from_json

    return str(value_from_json(value_json))


@dataclass(frozen=True)
class _Outcome:
    index: int
    lam: Fraction | None
    K: SetExpr
    L: SetExpr
    certificate: Certificate | None

    def record(self) -> dict:
        return {"index": self.index, "lambda": None if self.lam is None else format_rational(self.lam),
                "K": set_to_json(self.K), "L": set_to_json(self.L),
                "certificate": None if self.certificate is None else self.certificate.to_json()}


def _slack_key(c: Certificate) -> Fraction:
    lo, hi = _enclose_difference(c)
    return (lo + hi) / 2


def _bounded(value, bits: int) -> tuple[Fraction, Fraction]:
    lo, hi = value.enclose(bits)
    while hi is None:  # a negative power of a base whose enclosure still touches 0
        bits *= 2
        lo, hi = value.enclose(bits)
    return lo, hi


def _enclose_difference(c: Certificate, bits: int = 96) -> tuple[Fraction, Fraction]:
    llo, lhi = _bounded(c.lhs, bits)
    rlo, rhi = _bounded(c.rhs, bits)
    return llo - rhi, lhi - rlo


def _smaller_slack(a: _Outcome, b: _Outcome) -> bool:
    """Whether ``a`` has strictly smaller ``lhs - rhs`` than ``b`` (ties broken by serialization)."""
    ca, cb = a.certificate, b.certificate
    if all(isinstance(v, RadicalSum) for v in (ca.lhs, ca.rhs, cb.lhs, cb.rhs)):
        rel = compare(ca.lhs + cb.rhs, cb.lhs + ca.rhs).relation
    else:
        ka, kb = _slack_key(ca), _slack_key(cb)
        rel = Relation.LESS if ka < kb else Relation.GREATER if ka > kb else Relation.EQUAL
    if rel is Relation.EQUAL:
        return json.dumps(a.record(), sort_keys=True) < json.dumps(b.record(), sort_keys=True)
    return rel is Relation.LESS


def _run_one(theorem_id: str, K: SetExpr, L: SetExpr, lam: Fraction | None, p: ExtendedExponent,
             mpq, corrector: CubeSpec | None, unguarded: bool) -> Certificate:
    if theorem_id in ("card_sum", "trivial_card"):
        A = SetExpr.from_points(lattice_points(K), K.dim)
        B = SetExpr.from_points(lattice_points(L), L.dim)
        if A.is_empty() or B.is_empty():
            raise PreconditionError("requires non-empty finite sets A and B")
        return (verify_card_sum if theorem_id == "card_sum" else verify_trivial_card)(A, B)
    if theorem_id == "hks_sqrt":
        return verify_hks_sqrt(K, L)
    req = VerifyRequest(K, L, lam, theorem_id, p, corrector, mpq, unguarded)
    return verify_bm_pmean(req) if theorem_id == "bm_pmean" else verify_bm(req)


def _scan_chunk(args) -> list[_Outcome]:
    family, indices, count, lambdas, theorem_id, p, mpq, corrector, unguarded = args
    children = np.random.SeedSequence(family.seed).spawn(count)
    needs_lambda = theorem_id not in ("card_sum", "trivial_card", "hks_sqrt", "half_sum",
                                      "rational_dilation")
    out = []
    for i in indices:
        K, L = instance(family, np.random.Generator(np.random.PCG64(children[i])))
        for lam in (lambdas if needs_lambda else [None]):
            try:
                cert = _run_one(theorem_id, K, L, lam, p, mpq, corrector, unguarded)
            except PreconditionError:
                cert = None
            out.append(_Outcome(i, lam, K, L, cert))
    return out


def scan(family: InstanceFamily, lambdas: Sequence[Fraction], theorem_id: str, count: int,
         p: ExtendedExponent = INF, mpq: tuple[int, int, int] | None = None,
         corrector: CubeSpec | None = None, unguarded: bool = False, workers: int = 1) -> ScanReport:
    """Run one verifier over ``count`` generated pairs and every ``lambda`` in the grid.

    Theorems without a ``lambda`` (the cardinality bounds, the half-sum and
    rational-dilation forms) run once per pair.  Inputs failing a hypothesis
    are counted as skipped.
    """
    if theorem_id not in SCANNABLE:
        raise ValueError(f"cannot scan {theorem_id!r}; choose from {', '.join(SCANNABLE)}")
    lambdas = [Fraction(v) for v in lambdas]
    if any(not 0 < v < 1 for v in lambdas):
        raise ValueError("every lambda must lie in (0, 1)")
    covered = theorem_id in COVERED and not (theorem_id == "half_sum" and unguarded)
    workers = max(1, workers)
    chunks = [list(range(count))[w::workers] for w in range(workers)]
    jobs = [(family, c, count, lambdas, theorem_id, p, mpq, corrector, unguarded) for c in chunks if c]
    if workers == 1:
        results = [_scan_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_scan_chunk, jobs))
    # deterministic merge regardless of how the work was split
    outcomes = sorted((o for part in results for o in part),
                      key=lambda o: (o.index, -1 if o.lam is None else o.lam))
    report = ScanReport(theorem_id, covered)
    best: _Outcome | None = None
    for o in outcomes:
        if o.certificate is None:
            report.skipped += 1
            continue
        report.instances_run += 1
        if o.certificate.verdict is Verdict.HOLDS_EQUAL:
            report.equality_instances.append(o.record())
        elif o.certificate.verdict is Verdict.VIOLATED:
            report.violations.append(o.record())
        if best is None or _smaller_slack(o, best):
            best = o
    report.min_slack = None if best is None else best.record()
    return report


# ---------------------------------------------------------------------------
# Worked examples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReproResult:
    name: str
    passed: bool
    detail: str


def _value_is(value, expected) -> bool:
    return compare(value, Fraction(expected)).relation is Relation.EQUAL


def _check_naive() -> tuple[bool, str]:
    m, eps = 3, Fraction(1, 2)
    K, L = SetExpr.interval(0, m - eps), SetExpr.interval(0, m + eps / 2)
    cert = verify_bm(VerifyRequest(K, L, Fraction(1, 2), "naive"))
    ok = cert.verdict is Verdict.VIOLATED and _value_is(cert.lhs, 3) and _value_is(cert.rhs, Fraction(7, 2))
    return ok, f"G((K+L)/2) = {cert.lhs} < {cert.rhs}"


def _check_interval_remark() -> tuple[bool, str]:
    a = Fraction(1, 2)
    corrector = CubeSpec.interval(Interval1D(-a, Fraction(1), False, True))
    K, L = SetExpr.interval(-1, 0), SetExpr.interval(-2, 0)
    parts, ok = [], True
    for lam in (Fraction(1, 4), Fraction(1, 3), Fraction(1, 8)):
        cert = verify_bm(VerifyRequest(K, L, lam, "custom", corrector=corrector))
        ok &= cert.verdict is Verdict.VIOLATED and _value_is(cert.lhs, 2) and _value_is(cert.rhs, 2 + lam)
        parts.append(f"lambda={lam}: {cert.lhs} < {cert.rhs}")
    return ok, "; ".join(parts)


def _check_lambda_third() -> tuple[bool, str]:
    parts, ok = [], True
    for n in (1, 2, 3):
        K, L = SetExpr.cube(0, 1, n), SetExpr.cube(-5, 6, n)
        cert = verify_bm(VerifyRequest(K, L, Fraction(1, 3), "custom", corrector=CubeSpec.closed_unit()))
        ok &= cert.verdict is Verdict.VIOLATED and _value_is(cert.lhs, 5) and _value_is(cert.rhs, Fraction(16, 3))
        parts.append(f"n={n}: {cert.lhs} < {cert.rhs}")
    return ok, "; ".join(parts)


def _card(A_points, expected: int) -> Callable[[], tuple[bool, str]]:
    def run() -> tuple[bool, str]:
        A, B = SetExpr.from_points(A_points), SetExpr.lattice_cube(0, 1, 2)
        cert = verify_card_sum(A, B)
        size = int(cert.witness["|A+B+{0,1}^n|"]) if cert.witness else _square(cert)
        ok = size == expected and cert.verdict is Verdict.HOLDS_STRICT
        return ok, f"|A+B+{{0,1}}^2| = {size}, {cert.lhs} > {cert.rhs}"
    return run


def _square(cert: Certificate) -> int:
    """``|A+B+{0,1}^2|`` recovered from the left side ``|A+B+{0,1}^2|^(1/2)``."""
    sq = cert.lhs * cert.lhs
    return int(sq.as_fraction())


def _check_hks() -> tuple[bool, str]:
    parts, ok = [], True
    for x in (Fraction(1, 2), Fraction(3, 2), Fraction(7, 3), Fraction(1), Fraction(2), Fraction(3)):
        K = SetExpr.interval(-x, x)
        closed = count_lattice(_mid_plus(K, CubeSpec.closed_unit()))
        opened = count_lattice(_mid_plus(K, CubeSpec.open_sym(1)))
        fl = x.numerator // x.denominator
        if x.denominator == 1:
            ok &= closed == 2 * fl + 2 and opened == 2 * fl + 1
            parts.append(f"x={x}: {closed} > {opened}")
        else:
            ok &= closed == 2 * fl + 2 and opened == 2 * fl + 3
            parts.append(f"x={x}: {closed} < {opened}")
        ok &= verify_hks_sqrt(K, K).verdict.holds
    return ok, "; ".join(parts)


def _mid_plus(K: SetExpr, corrector: CubeSpec) -> SetExpr:
    from .verifiers import combination

    return combination(K, K, Fraction(1, 2), Fraction(1, 2), corrector)


def _check_ell_remark() -> tuple[bool, str]:
    parts, ok = [], True
    for m in (1, 2, 3, 5):
        K = SetExpr.from_boxes([Box.closed([-2 * m], [-1]), Box.closed([1], [2 * m])])
        L = SetExpr.from_points([(0,)])
        M = SetExpr.from_boxes([Box.closed([-m], [Fraction(-1, 2)]), Box.closed([Fraction(1, 2)], [m])])
        c1 = verify_lemma_ell(K, L, M, Fraction(1, 2))
        c2 = verify_lemma_ell(K, L, SetExpr.interval(-m, m), Fraction(1, 2))
        rhs = 2 * m + Fraction(1, 2)
        ok &= _value_is(c1.lhs, 2 * m + 2) and _value_is(c2.lhs, 2 * m + 1) and _value_is(c1.rhs, rhs)
        ok &= c1.verdict is c2.verdict is Verdict.HOLDS_STRICT
        parts.append(f"m={m}: {c1.lhs} and {c2.lhs} vs {c1.rhs}")
    return ok, "; ".join(parts)


def _check_main_sharp() -> tuple[bool, str]:
    parts, ok = [], True
    for m, n in ((1, 1), (3, 2), (2, 3), (4, 2)):
        K = SetExpr.cube(0, m, n)
        for lam in (Fraction(1, 3), Fraction(1, 2)):
            cert = verify_bm(VerifyRequest(K, K, lam))
            ok &= cert.verdict is Verdict.HOLDS_EQUAL and _value_is(cert.lhs, m + 1)
        parts.append(f"[0,{m}]^{n}: {cert.lhs} = {cert.rhs}")
    return ok, "; ".join(parts)


def _check_pmean_sharp() -> tuple[bool, str]:
    parts, ok = [], True
    for m, n in ((2, 2), (1, 3), (3, 1)):
        K = SetExpr.cube(0, m, n)
        for p in (INF, Fraction(0), Fraction(1), Fraction(-1, n)):
            cert = verify_bm_pmean(VerifyRequest(K, K, Fraction(1, 2), "bm_pmean", p=p))
            ok &= cert.verdict is Verdict.HOLDS_EQUAL and _value_is(cert.lhs, (m + 1) ** n)
        parts.append(f"[0,{m}]^{n}: {cert.lhs} = (m+1)^n")
    return ok, "; ".join(parts)


def _check_half_sum_sharp() -> tuple[bool, str]:
    parts, ok = [], True
    for m, n in ((1, 1), (3, 1), (3, 2), (5, 2), (1, 3)):
        cert = verify_bm(VerifyRequest(SetExpr.cube(0, m, n), SetExpr.cube(-m, 0, n), None, "half_sum"))
        ok &= cert.verdict is Verdict.HOLDS_EQUAL and _value_is(cert.lhs, m + 1)
        parts.append(f"m={m}, n={n}: {cert.lhs} = {cert.rhs}")
    return ok, "; ".join(parts)


def _check_card_cubes() -> tuple[bool, str]:
    parts, ok = [], True
    for m1, m2, n in ((0, 0, 1), (1, 3, 1), (2, 1, 2), (1, 2, 3)):
        cert = verify_card_sum(SetExpr.lattice_cube(0, m1, n), SetExpr.lattice_cube(0, m2, n))
        ok &= cert.verdict is Verdict.HOLDS_EQUAL and _value_is(cert.lhs, m1 + m2 + 2)
        parts.append(f"m1={m1}, m2={m2}, n={n}: {cert.lhs} = {cert.rhs}")
    return ok, "; ".join(parts)


def _check_riemann() -> tuple[bool, str]:
    seq = riemann_limit_demo(SetExpr.interval(0, Fraction(1, 3)), SetExpr.interval(-1, 1), 12)
    v10 = dict(seq)[10]
    values = [v for _, v in seq]
    ok = v10 == Fraction(341, 1024) and all(a <= b for a, b in zip(values, values[1:]))
    return ok, f"k=10 lower sum {v10}, k=12 lower sum {values[-1]}"


REPRO_CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "naive-counterexample": _check_naive,
    "interval-remark": _check_interval_remark,
    "lambda-third-failure": _check_lambda_third,
    "planar-sumset-18": _card([(0, 0), (1, 0), (2, 0), (1, 1)], 18),
    "planar-sumset-24": _card([(0, 0), (0, 1), (1, 1), (4, 1)], 24),
    "hks-noncomparable": _check_hks,
    "ell-remark": _check_ell_remark,
    "main-bm-sharp": _check_main_sharp,
    "pmean-sharp": _check_pmean_sharp,
    "half-sum-sharp": _check_half_sum_sharp,
    "card-sum-cubes": _check_card_cubes,
    "riemann-third": _check_riemann,
}


def repro_paper(names: Iterable[str] | None = None) -> list[ReproResult]:
    """Replay the worked examples; each result says whether the exact recorded values came out."""
    selected = list(REPRO_CHECKS) if names is None else list(names)
    out = []
    for name in selected:
        if name not in REPRO_CHECKS:
            raise KeyError(f"unknown check {name!r}")
        try:
            ok, detail = REPRO_CHECKS[name]()
        except Exception as exc:  # a crash is a failed check, reported by name
            ok, detail = False, f"error: {exc!r}"
        out.append(ReproResult(name, bool(ok), detail))
    return out


def repro_table(results: Sequence[ReproResult]) -> str:
    width = max(len(r.name) for r in results)
    return "\n".join(f"{'PASS' if r.passed else 'FAIL'}  {r.name.ljust(width)}  {r.detail}" for r in results)
