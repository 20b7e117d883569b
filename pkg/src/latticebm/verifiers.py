"""Exact checkers for the discrete Brunn-Minkowski family of inequalities.

Every checker returns a :class:`Certificate` whose verdict is decided by an
exact comparison of the two sides.  Failed hypotheses raise
:class:`PreconditionError` instead of producing a verdict.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any

from .exactnum import (
    INF,
    ExactValue,
    ExtendedExponent,
    OrderingCertificate,
    RadicalSum,
    RationalLike,
    Relation,
    as_fraction,
    compare,
    conj_exponent,
    exact,
    format_exponent,
    format_rational,
    p_mean,
    rat_ceil,
    rat_floor,
    value_to_json,
)
from .functions import (
    CubeSpec,
    PointMassFunction,
    SupConvolution,
    check_hypothesis,
    evaluate,
    lattice_sum,
    pull_back,
)
from .sets import (
    Box,
    Interval1D,
    LatticeBasis,
    Point,
    SetExpr,
    bounding_box,
    contains,
    count_lattice,
    count_combination_translates,
    lattice_points,
    lattice_transform,
    membership,
    minkowski_sum,
    noninteger_endpoints,
    normalize_1d,
    scale,
)


class Verdict(enum.Enum):
    HOLDS_STRICT = "HoldsStrict"
    HOLDS_EQUAL = "HoldsEqual"
    VIOLATED = "Violated"

    @property
    def holds(self) -> bool:
        return self is not Verdict.VIOLATED


_VERDICTS = {Relation.GREATER: Verdict.HOLDS_STRICT, Relation.EQUAL: Verdict.HOLDS_EQUAL,
             Relation.LESS: Verdict.VIOLATED}


class PreconditionError(ValueError):
    """An input outside the hypotheses of the requested inequality."""


@dataclass(frozen=True)
class Certificate:
    theorem_id: str
    verdict: Verdict
    lhs: ExactValue
    rhs: ExactValue
    witness: dict[str, Any] | None = None
    ordering: OrderingCertificate | None = field(default=None, compare=False, repr=False)

    def claim(self) -> tuple:
        """Everything except the theorem label: used to match certificates across routes."""
        return (self.verdict, self.lhs, self.rhs, self.witness)

    def to_json(self) -> dict:
        return {"theorem": self.theorem_id, "verdict": self.verdict.value,
                "lhs": value_to_json(self.lhs), "rhs": value_to_json(self.rhs),
                "witness": self.witness}


def _certify(theorem_id: str, lhs, rhs, details: dict[str, Any]) -> Certificate:
    """Compare ``lhs`` against ``rhs``; the details are kept as witness unless the inequality is strict."""
    lhs, rhs = exact(lhs), exact(rhs)
    ordering = compare(lhs, rhs)
    verdict = _VERDICTS[ordering.relation]
    witness = None if verdict is Verdict.HOLDS_STRICT else details
    return Certificate(theorem_id, verdict, lhs, rhs, witness, ordering)


@lru_cache(maxsize=8192)
def _count(S: SetExpr) -> int:
    return count_lattice(S)


def _check_lambda(lam: RationalLike) -> Fraction:
    lam = as_fraction(lam)
    if not 0 < lam < 1:
        raise PreconditionError(f"requires 0 < lambda < 1, got {lam}")
    return lam


def _check_nonempty(K: SetExpr, L: SetExpr) -> int:
    if K.dim != L.dim:
        raise PreconditionError(f"dimension mismatch: K has dimension {K.dim}, L has {L.dim}")
    if K.is_empty() or L.is_empty():
        raise PreconditionError("requires non-empty sets K and L")
    return K.dim


def _check_exponent(p: ExtendedExponent, n: int) -> None:
    if p != INF and (p == -INF or p < Fraction(-1, n)):
        raise PreconditionError(f"requires -1/n <= p <= inf with n={n}, got p={format_exponent(p)}")


# ---------------------------------------------------------------------------
# Geometric inequalities with a corrector cube
# ---------------------------------------------------------------------------

THEOREMS = ("main_bm", "rational_dilation", "half_sum", "naive", "custom", "bm_pmean")


@dataclass(frozen=True)
class VerifyRequest:
    """Inputs of one geometric check.

    ``theorem_id`` picks the coefficients, the default corrector and the
    hypotheses that are enforced:

    * ``main_bm``: ``(1-lam)K + lam L + (-1,1)^n``
    * ``rational_dilation``: ``(m/q)K + (p/q)L + [-(q-1)/q, (q-1)/q]^n`` with ``mpq=(m, p, q)``
    * ``half_sum``: ``(K+L)/2 + [0,1]^n``, requires ``G(K)G(L) > 0`` unless ``unguarded``
    * ``naive``: ``(1-lam)K + lam L`` with no corrector
    * ``custom``: ``(1-lam)K + lam L + corrector``
    * ``bm_pmean``: the p-mean form with the open cube, see :func:`verify_bm_pmean`

    An explicit ``corrector`` replaces the theorem's default.
    """

    K: SetExpr
    L: SetExpr
    lam: Fraction | None = None
    theorem_id: str = "main_bm"
    p: ExtendedExponent = INF
    corrector: CubeSpec | None = None
    mpq: tuple[int, int, int] | None = None
    unguarded: bool = False


def _coefficients(req: VerifyRequest, n: int) -> tuple[Fraction, Fraction, CubeSpec]:
    tid = req.theorem_id
    if tid == "rational_dilation":
        if req.mpq is None:
            raise PreconditionError("rational_dilation requires integers (m, p, q)")
        m, p, q = (int(v) for v in req.mpq)
        if min(m, p, q) < 1:
            raise PreconditionError("rational_dilation requires positive integers m, p, q")
        if m + p > q:
            raise PreconditionError(f"requires alpha + beta <= 1, i.e. m + p <= q; got {m}+{p} > {q}")
        default = CubeSpec.closed_sym(Fraction(q - 1, q))
        return Fraction(m, q), Fraction(p, q), req.corrector or default
    if tid == "half_sum":
        if req.lam is not None and as_fraction(req.lam) != Fraction(1, 2):
            raise PreconditionError("half_sum requires lambda = 1/2")
        return Fraction(1, 2), Fraction(1, 2), req.corrector or CubeSpec.closed_unit()
    lam = _check_lambda(req.lam if req.lam is not None else Fraction(1, 2))
    if tid in ("main_bm", "bm_pmean"):
        return 1 - lam, lam, req.corrector or CubeSpec.open_sym(1)
    if tid == "naive":
        return 1 - lam, lam, req.corrector or CubeSpec.none()
    if tid == "custom":
        if req.corrector is None:
            raise PreconditionError("custom requires an explicit corrector")
        return 1 - lam, lam, req.corrector
    raise PreconditionError(f"unknown theorem {tid!r}; expected one of {', '.join(THEOREMS)}")


def combination(K: SetExpr, L: SetExpr, alpha: RationalLike, beta: RationalLike,
                corrector: CubeSpec) -> SetExpr:
    """``alpha K + beta L + C``."""
    core = minkowski_sum(scale(K, alpha), scale(L, beta))
    if corrector.kind == "none":
        return core
    return minkowski_sum(core, corrector.as_set(K.dim))


@lru_cache(maxsize=4096)
def _combination_count(K: SetExpr, L: SetExpr, alpha: Fraction, beta: Fraction,
                       corrector: CubeSpec) -> int:
    box = corrector.as_box(K.dim)
    if box is not None and K.is_finite() and L.is_finite():
        return count_combination_translates(K.points, L.points, alpha, beta, box)
    return count_lattice(combination(K, L, alpha, beta, corrector))


def verify_bm(req: VerifyRequest) -> Certificate:
    """``G(alpha K + beta L + C)^(1/n) >= alpha G(K)^(1/n) + beta G(L)^(1/n)``."""
    if req.theorem_id == "bm_pmean":
        return verify_bm_pmean(req)
    n = _check_nonempty(req.K, req.L)
    alpha, beta, corrector = _coefficients(req, n)
    gk, gl = _count(req.K), _count(req.L)
    needs_positive = req.theorem_id == "rational_dilation" or (
        req.theorem_id == "half_sum" and not req.unguarded)
    if needs_positive and gk * gl == 0:
        raise PreconditionError(f"{req.theorem_id} requires G_n(K)G_n(L)>0; got G_n(K)={gk}, G_n(L)={gl}")
    gm = _combination_count(req.K, req.L, alpha, beta, corrector)
    lhs = RadicalSum.root(gm, n)
    rhs = RadicalSum(n, ((alpha, Fraction(gk)), (beta, Fraction(gl))))
    return _certify(req.theorem_id, lhs, rhs, {"G(M)": str(gm), "G(K)": str(gk), "G(L)": str(gl)})


def verify_bm_pmean(req: VerifyRequest) -> Certificate:
    """``G((1-lam)K + lam L + (-1,1)^n) >= M_q(G(K), G(L), lam)`` with ``q = p/(np+1)``."""
    n = _check_nonempty(req.K, req.L)
    _check_exponent(req.p, n)
    lam = _check_lambda(req.lam if req.lam is not None else Fraction(1, 2))
    corrector = req.corrector or CubeSpec.open_sym(1)
    gk, gl = _count(req.K), _count(req.L)
    gm = _combination_count(req.K, req.L, 1 - lam, lam, corrector)
    rhs = p_mean(gk, gl, lam, conj_exponent(req.p, n))
    return _certify("bm_pmean", Fraction(gm), rhs,
                    {"sum_h": str(gm), "sum_f": str(gk), "sum_g": str(gl)})


def verify(req: VerifyRequest) -> Certificate:
    return verify_bm(req)


# ---------------------------------------------------------------------------
# One-dimensional bound with non-integer endpoints
# ---------------------------------------------------------------------------

def verify_lemma_ell(K: SetExpr, L: SetExpr, M: SetExpr, lam: RationalLike) -> Certificate:
    """``G(M) + l(M) >= (1-lam) G(K) + lam G(L)`` for ``M`` a union of disjoint compact intervals
    containing ``(1-lam)K + lam L``; ``l(M)`` counts non-integer endpoints."""
    n = _check_nonempty(K, L)
    if n != 1 or M.dim != 1:
        raise PreconditionError("the endpoint-count bound is one-dimensional")
    lam = _check_lambda(lam)
    intervals = normalize_1d(M)
    if any(iv.lo_open or iv.hi_open for iv in intervals):
        raise PreconditionError("requires M to be a union of compact intervals")
    if not contains(M, minkowski_sum(scale(K, 1 - lam), scale(L, lam))):
        raise PreconditionError("requires (1-lambda)K + lambda L to be contained in M")
    gm, ell = count_lattice(M), noninteger_endpoints(intervals)
    gk, gl = count_lattice(K), count_lattice(L)
    return _certify("lemma_ell", Fraction(gm + ell), (1 - lam) * gk + lam * gl,
                    {"G(M)": str(gm), "l(M)": str(ell), "G(K)": str(gk), "G(L)": str(gl)})


# ---------------------------------------------------------------------------
# Functional form
# ---------------------------------------------------------------------------

def _lattice_points_in(S: SetExpr, basis: LatticeBasis) -> list[Point]:
    """``S ∩ Λ`` by testing every lattice vector whose coordinates fit the bounding box of ``S``."""
    if S.is_empty():
        return []
    lo, hi = bounding_box(S)
    corners = [basis.solve(c) for c in itertools.product(*zip(lo, hi))]
    ranges = [range(rat_ceil(min(c[i] for c in corners)), rat_floor(max(c[i] for c in corners)) + 1)
              for i in range(S.dim)]
    out = []
    for j in itertools.product(*ranges):
        z = basis.apply(j)
        if membership(S, z):
            out.append(z)
    return out


def _sum_over(phi, S: SetExpr, basis: LatticeBasis) -> Fraction:
    return sum((phi(z) for z in _lattice_points_in(S, basis)), Fraction(0))


def _bbl_direct(f, g, h, K, L, lam, basis: LatticeBasis) -> tuple[Fraction, Fraction, Fraction]:
    """The three sums of the functional inequality over the lattice ``Λ = φ(Z^n)``."""
    sum_f, sum_g = _sum_over(f, K, basis), _sum_over(g, L, basis)
    if basis.is_diagonal():
        # φ((-1,1)^n) is again an axis-parallel box
        cell = CubeSpec.box(Interval1D.open(-abs(d), abs(d)) for d in basis.diagonal_entries())
        M = combination(K, L, 1 - lam, lam, cell)
        return _sum_over(SupConvolution(h, cell), M, basis), sum_f, sum_g
    if not (h.is_finite() and K.is_finite() and L.is_finite()):
        raise PreconditionError("a non-diagonal lattice basis needs finitely supported data")
    values = h.point_values()

    def h_sup(z: Point) -> Fraction:
        # sup over u in φ((-1,1)^n) of h(z + u)
        best = Fraction(0)
        for p, v in values.items():
            if v > best and all(-1 < c < 1 for c in basis.solve(tuple(a - b for a, b in zip(p, z)))):
                best = v
        return best

    # z ∈ Λ lies in M exactly when φ^{-1}(z) is within the open unit cube of some φ^{-1}(core point)
    core = minkowski_sum(scale(K, 1 - lam), scale(L, lam))
    members: set[Point] = set()
    for q in core.points:
        base = basis.solve(q)
        for j in itertools.product(*[range(rat_floor(c), rat_ceil(c) + 1) for c in base]):
            if all(-1 < c - d < 1 for c, d in zip(base, j)):
                members.add(basis.apply(j))
    return sum((h_sup(z) for z in members), Fraction(0)), sum_f, sum_g


def verify_bbl(f: PointMassFunction, g: PointMassFunction, h: PointMassFunction,
               K: SetExpr, L: SetExpr, lam: RationalLike, p: ExtendedExponent,
               basis: LatticeBasis | None = None) -> Certificate:
    """``sum over M ∩ Λ of h^sup >= M_q(sum over K ∩ Λ of f, sum over L ∩ Λ of g)``.

    ``M = (1-lam)K + lam L + φ((-1,1)^n)``, ``q = p/(np+1)`` and ``Λ = φ(Z^n)``
    (the integer lattice when ``basis`` is None).  The pointwise p-mean
    hypothesis is checked first.
    """
    n = _check_nonempty(K, L)
    if not f.dim == g.dim == h.dim == n:
        raise PreconditionError("dimension mismatch between the functions and the sets")
    _check_exponent(p, n)
    lam = _check_lambda(lam)
    bad = check_hypothesis(f, g, h, K, L, lam, p)
    if bad is not None:
        pt = lambda v: "(" + ", ".join(format_rational(c) for c in v) + ")"  # noqa: E731
        raise PreconditionError(
            f"hypothesis h((1-lambda)x + lambda y) >= M_p(f(x), g(y), lambda) fails at "
            f"x={pt(bad.x)}, y={pt(bad.y)}: h={format_rational(bad.actual)} < {bad.required}")
    if basis is None or basis == LatticeBasis.identity(n):
        M = combination(K, L, 1 - lam, lam, CubeSpec.open_sym(1))
        sum_h = lattice_sum(SupConvolution(h, CubeSpec.open_sym(1)), M)
        sum_f, sum_g = lattice_sum(f, K), lattice_sum(g, L)
    else:
        if basis.dim != n:
            raise PreconditionError("lattice basis has the wrong dimension")
        sum_h, sum_f, sum_g = _bbl_direct(f, g, h, K, L, lam, basis)
    rhs = p_mean(sum_f, sum_g, lam, conj_exponent(p, n))
    return _certify("bbl", sum_h, rhs, {"sum_h": format_rational(sum_h),
                                        "sum_f": format_rational(sum_f),
                                        "sum_g": format_rational(sum_g)})


def pull_back_data(f, g, h, K: SetExpr, L: SetExpr, basis: LatticeBasis):
    """``(f∘φ, g∘φ, h∘φ, φ^{-1}K, φ^{-1}L)``: the same problem on the integer lattice."""
    return (pull_back(f, basis), pull_back(g, basis), pull_back(h, basis),
            lattice_transform(K, basis), lattice_transform(L, basis))


# ---------------------------------------------------------------------------
# Floor/ceiling product form and its square-root consequence
# ---------------------------------------------------------------------------

def _integer_values(phi: PointMassFunction) -> dict[tuple[int, ...], Fraction]:
    """Nonzero values of ``phi`` on ``Z^n``."""
    out = {tuple(int(c) for c in x): v for x, v in phi.support.items()
           if all(c.denominator == 1 for c in x)}
    if phi.char_part is not None:
        for z in lattice_points(phi.char_part):
            out[z] = max(out.get(z, Fraction(0)), Fraction(1))
    return out


def verify_hks(f: PointMassFunction, g: PointMassFunction, h: PointMassFunction,
               k: PointMassFunction, lam: RationalLike, window: SetExpr) -> Certificate:
    """``(sum h)(sum k) >= (sum f)(sum g)`` over ``Z^n`` given
    ``h(floor((1-lam)x + lam y)) k(ceil(lam x + (1-lam)y)) >= f(x) g(y)``."""
    lam = _check_lambda(lam)
    n = window.dim
    if not f.dim == g.dim == h.dim == k.dim == n:
        raise PreconditionError("dimension mismatch between the functions and the window")
    fv, gv = _integer_values(f), _integer_values(g)
    for x in list(fv) + list(gv):
        if not membership(window, x):
            raise PreconditionError(f"requires f and g supported in the window; {x} lies outside")
    for (x, a), (y, b) in itertools.product(sorted(fv.items()), sorted(gv.items())):
        lo = tuple(rat_floor((1 - lam) * s + lam * t) for s, t in zip(x, y))
        hi = tuple(rat_ceil(lam * s + (1 - lam) * t) for s, t in zip(x, y))
        if evaluate(h, lo) * evaluate(k, hi) < a * b:
            raise PreconditionError(
                f"hypothesis h(floor(...)) k(ceil(...)) >= f(x) g(y) fails at x={list(x)}, y={list(y)}")
    sh = sum(_integer_values(h).values(), Fraction(0))
    sk = sum(_integer_values(k).values(), Fraction(0))
    sf, sg = sum(fv.values(), Fraction(0)), sum(gv.values(), Fraction(0))
    return _certify("hks", sh * sk, sf * sg, {"sum_h": format_rational(sh), "sum_k": format_rational(sk),
                                            "sum_f": format_rational(sf), "sum_g": format_rational(sg)})


def hks_derived_instance(K: SetExpr, L: SetExpr):
    """``(χ_K, χ_L, χ_{(K+L)/2 + (-1,0]^n}, χ_{(K+L)/2 + [0,1)^n}, window)`` for ``lam = 1/2``."""
    n = _check_nonempty(K, L)
    mid = scale(minkowski_sum(K, L), Fraction(1, 2))
    h = minkowski_sum(mid, CubeSpec.neg_half_open_unit().as_set(n))
    k = minkowski_sum(mid, CubeSpec.half_open_unit().as_set(n))
    window = SetExpr(n, K.boxes + L.boxes, K.points | L.points)
    return (PointMassFunction.characteristic(K), PointMassFunction.characteristic(L),
            PointMassFunction.characteristic(h), PointMassFunction.characteristic(k), window)


def verify_hks_sqrt(K: SetExpr, L: SetExpr) -> Certificate:
    """``G((K+L)/2 + [0,1]^n)^2 >= G(K) G(L)``."""
    _check_nonempty(K, L)
    gm = count_lattice(combination(K, L, Fraction(1, 2), Fraction(1, 2), CubeSpec.closed_unit()))
    gk, gl = count_lattice(K), count_lattice(L)
    return _certify("hks_sqrt", Fraction(gm * gm), Fraction(gk * gl),
                    {"G(M)": str(gm), "G(K)": str(gk), "G(L)": str(gl)})


# ---------------------------------------------------------------------------
# Finite sets of integer points
# ---------------------------------------------------------------------------

def _integer_point_set(A: SetExpr, name: str) -> set[tuple[int, ...]]:
    if A.boxes:
        raise PreconditionError(f"{name} must be a finite set of integer points")
    if not A.points:
        raise PreconditionError(f"{name} must be non-empty")
    if any(c.denominator != 1 for p in A.points for c in p):
        raise PreconditionError(f"{name} must contain integer points only")
    return {tuple(int(c) for c in p) for p in A.points}


def sumset(A, B) -> set[tuple[int, ...]]:
    """``A + B`` for finite sets of integer tuples (reference implementation)."""
    return {tuple(a + b for a, b in zip(x, y)) for x in A for y in B}


def sumset_size(A, B, unit_cube: bool = False) -> int:
    """``|A + B|``, or ``|A + B + {0,1}^n|`` with ``unit_cube``.

    Points are packed into one big integer bitmask with a mixed radix wide
    enough that coordinate sums never carry, so a Minkowski sum becomes a
    union of shifted copies.
    """
    A, B = list(A), list(B)
    if len(A) > len(B):
        A, B = B, A
    n = len(A[0])
    extra = 1 if unit_cube else 0
    lo_a = [min(p[i] for p in A) for i in range(n)]
    lo_b = [min(p[i] for p in B) for i in range(n)]
    span = [max(p[i] for p in A) - lo_a[i] + max(p[i] for p in B) - lo_b[i] + 1 + extra
            for i in range(n)]
    strides = [1] * n
    for i in range(1, n):
        strides[i] = strides[i - 1] * span[i - 1]

    def code(p, lo):
        return sum((c - l) * s for c, l, s in zip(p, lo, strides))

    mask_b = 0
    for q in B:
        mask_b |= 1 << code(q, lo_b)
    total = 0
    for p in A:
        total |= mask_b << code(p, lo_a)
    if unit_cube:
        for s in strides:
            total |= total << s
    return total.bit_count()


def verify_card_sum(A: SetExpr, B: SetExpr) -> Certificate:
    """``|A + B + {0,1}^n|^(1/n) >= |A|^(1/n) + |B|^(1/n)``."""
    if A.dim != B.dim:
        raise PreconditionError("dimension mismatch between A and B")
    a, b = _integer_point_set(A, "A"), _integer_point_set(B, "B")
    n = A.dim
    total = sumset_size(a, b, unit_cube=True)
    lhs = RadicalSum.root(total, n)
    rhs = RadicalSum(n, ((Fraction(1), Fraction(len(a))), (Fraction(1), Fraction(len(b)))))
    return _certify("card_sum", lhs, rhs, {"|A+B+{0,1}^n|": str(total), "|A|": str(len(a)),
                                          "|B|": str(len(b))})


def verify_trivial_card(A: SetExpr, B: SetExpr) -> Certificate:
    """``|A + B| >= |A| + |B| - 1``."""
    if A.dim != B.dim:
        raise PreconditionError("dimension mismatch between A and B")
    a, b = _integer_point_set(A, "A"), _integer_point_set(B, "B")
    total = sumset_size(a, b)
    return _certify("trivial_card", Fraction(total), Fraction(len(a) + len(b) - 1),
                    {"|A+B|": str(total), "|A|": str(len(a)), "|B|": str(len(b))})


# ---------------------------------------------------------------------------
# Lower Riemann sums on dyadic grids
# ---------------------------------------------------------------------------

def _window_axes(window: SetExpr) -> list[tuple[Fraction, Fraction]]:
    if len(window.boxes) != 1 or window.points:
        raise PreconditionError("the window must be a single box")
    return [(f.lo, f.hi) for f in window.boxes[0].factors]


def _grid_range(lo: Fraction, hi: Fraction, step: Fraction) -> range:
    """Indices ``j`` with ``lo < j*step < hi``."""
    first = rat_floor(lo / step) + 1
    last = rat_ceil(hi / step) - 1
    return range(first, last + 1)


def _inside_count_1d(intervals: list[Interval1D], lo: Fraction, hi: Fraction, step: Fraction) -> int:
    """Grid points ``x = j*step`` in ``(lo, hi)`` whose cell ``[x, x+step]`` lies in one interval."""
    total = 0
    grid = _grid_range(lo, hi, step)
    for iv in intervals:
        # x >= iv.lo (strict when open) and x + step <= iv.hi (strict when open)
        first = rat_ceil(iv.lo / step)
        if iv.lo_open and first * step == iv.lo:
            first += 1
        last = rat_floor((iv.hi - step) / step)
        if iv.hi_open and last * step == iv.hi - step:
            last -= 1
        first, last = max(first, grid.start), min(last, grid.stop - 1)
        total += max(0, last - first + 1)
    return total


def riemann_limit_demo(f_set: SetExpr, window: SetExpr, k_max: int,
                       max_cells: int = 4_000_000) -> list[tuple[int, Fraction]]:
    """Lower sums ``2^(-kn) * sum over x in int(window) ∩ 2^(-k)Z^n of inf_{x + [0,2^-k]^n} χ_S``
    for ``k = 0..k_max``; they increase to the volume of ``S`` inside the window."""
    axes = _window_axes(window)
    n = window.dim
    if f_set.dim != n:
        raise PreconditionError("dimension mismatch between the set and the window")
    out = []
    for k in range(k_max + 1):
        step = Fraction(1, 2 ** k)
        if n == 1:
            hits = _inside_count_1d(normalize_1d(f_set), axes[0][0], axes[0][1], step)
        else:
            ranges = [_grid_range(lo, hi, step) for lo, hi in axes]
            size = 1
            for r in ranges:
                size *= len(r)
            if size > max_cells:
                raise PreconditionError(f"level k={k} needs {size} cells, above the limit {max_cells}")
            hits = 0
            for j in itertools.product(*ranges):
                cell = Box(tuple(Interval1D.closed(c * step, (c + 1) * step) for c in j))
                if contains(f_set, SetExpr(n, (cell,))):
                    hits += 1
        out.append((k, hits * step ** n))
    return out


def union_volume(S: SetExpr) -> Fraction:
    """Lebesgue measure of a box union, by coordinate compression."""
    boxes = [b for b in S.boxes if all(f.lo < f.hi for f in b.factors)]
    if not boxes:
        return Fraction(0)
    n = S.dim
    cuts = [sorted({c for b in boxes for c in (b.factors[i].lo, b.factors[i].hi)}) for i in range(n)]
    total = Fraction(0)
    for cell in itertools.product(*[list(zip(c, c[1:])) for c in cuts]):
        mid = tuple((a + b) / 2 for a, b in cell)
        if any(b.contains(mid) for b in boxes):
            vol = Fraction(1)
            for a, b in cell:
                vol *= b - a
            total += vol
    return total
