"""Finitely supported nonnegative functions and their sup-convolutions with cubes."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Protocol

from .exactnum import (
    ExactValue,
    ExtendedExponent,
    RationalLike,
    Relation,
    as_fraction,
    compare,
    dyadic_ceil,
    p_mean,
    parse_rational,
)
from .sets import (
    Box,
    Interval1D,
    Point,
    SetExpr,
    as_point,
    cell_point,
    intersect,
    lattice_points,
    membership,
    minkowski_sum,
    uncovered_cells,
)


@dataclass(frozen=True)
class CubeSpec:
    """A corrector set ``C`` given as a product of identical (or listed) intervals.

    ``kind`` is one of ``open_sym`` ((-r, r)^n), ``closed_sym`` ([-r, r]^n),
    ``closed_unit`` ([0, 1]^n), ``half_open_unit`` ([0, 1)^n),
    ``neg_half_open_unit`` ((-1, 0]^n), ``interval`` (``factor``^n),
    ``box`` (explicit ``factors``) or ``none`` (no corrector).
    """

    kind: str
    radius: Fraction | None = None
    factor: Interval1D | None = None
    factors: tuple[Interval1D, ...] | None = None

    _KINDS = ("open_sym", "closed_sym", "closed_unit", "half_open_unit",
              "neg_half_open_unit", "interval", "box", "none")

    def __post_init__(self) -> None:
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown cube kind {self.kind!r}")
        if self.kind in ("open_sym", "closed_sym"):
            if self.radius is None or as_fraction(self.radius) <= 0:
                raise ValueError("symmetric cubes need a positive radius")
            object.__setattr__(self, "radius", as_fraction(self.radius))
        if self.kind == "interval" and self.factor is None:
            raise ValueError("an interval cube needs its factor")
        if self.kind == "box" and not self.factors:
            raise ValueError("a box cube needs its factors")

    @classmethod
    def open_sym(cls, r: RationalLike = 1) -> CubeSpec:
        return cls("open_sym", as_fraction(r))

    @classmethod
    def closed_sym(cls, r: RationalLike) -> CubeSpec:
        return cls("closed_sym", as_fraction(r))

    @classmethod
    def closed_unit(cls) -> CubeSpec:
        return cls("closed_unit")

    @classmethod
    def half_open_unit(cls) -> CubeSpec:
        return cls("half_open_unit")

    @classmethod
    def neg_half_open_unit(cls) -> CubeSpec:
        return cls("neg_half_open_unit")

    @classmethod
    def interval(cls, factor: Interval1D) -> CubeSpec:
        return cls("interval", factor=factor)

    @classmethod
    def box(cls, factors: Iterable[Interval1D]) -> CubeSpec:
        return cls("box", factors=tuple(factors))

    @classmethod
    def none(cls) -> CubeSpec:
        return cls("none")

    def _factor(self) -> Interval1D | None:
        match self.kind:
            case "open_sym":
                return Interval1D.open(-self.radius, self.radius)
            case "closed_sym":
                return Interval1D.closed(-self.radius, self.radius)
            case "closed_unit":
                return Interval1D.closed(0, 1)
            case "half_open_unit":
                return Interval1D(Fraction(0), Fraction(1), False, True)
            case "neg_half_open_unit":
                return Interval1D(Fraction(-1), Fraction(0), True, False)
            case "interval":
                return self.factor
        return None

    def as_box(self, n: int) -> Box | None:
        if self.kind == "none":
            return None
        if self.kind == "box":
            if len(self.factors) != n:
                raise ValueError(f"corrector has dimension {len(self.factors)}, expected {n}")
            return Box(self.factors)
        return Box.cube(self._factor(), n)

    def as_set(self, n: int) -> SetExpr:
        """The corrector as a set; ``none`` is the origin."""
        b = self.as_box(n)
        if b is None:
            return SetExpr(n, (), frozenset({(Fraction(0),) * n}))
        return SetExpr(n, (b,))

    def reflected(self, n: int) -> SetExpr:
        """``-C``."""
        s = self.as_set(n)
        return SetExpr(n, tuple(Box(tuple(f.scale(Fraction(-1)) for f in b.factors)) for b in s.boxes),
                       frozenset(tuple(-c for c in p) for p in s.points))

    def __str__(self) -> str:
        if self.kind in ("open_sym", "closed_sym"):
            return f"{self.kind}:{self.radius}"
        if self.kind == "interval":
            return f"interval:{self.factor}"
        if self.kind == "box":
            return "box:" + " x ".join(str(f) for f in self.factors)
        return self.kind


def parse_interval(text: str) -> Interval1D:
    """``"[a,b)"``-style interval notation."""
    text = text.strip()
    if len(text) < 5 or text[0] not in "[(" or text[-1] not in "])" or "," not in text:
        raise ValueError(f"expected an interval such as '[-1/2,1)', got {text!r}")
    lo, hi = (parse_rational(part) for part in text[1:-1].split(",", 1))
    return Interval1D(lo, hi, text[0] == "(", text[-1] == ")")


def parse_cube(text: str) -> CubeSpec:
    """``open_sym:1``, ``closed_sym:1/2``, ``closed_unit``, ``half_open_unit``,
    ``neg_half_open_unit``, ``none`` or ``interval:[-1/2,1)``."""
    kind, _, arg = text.strip().partition(":")
    if kind in ("open_sym", "closed_sym"):
        return CubeSpec(kind, parse_rational(arg or "1"))
    if kind == "interval":
        return CubeSpec.interval(parse_interval(arg))
    if kind in ("closed_unit", "half_open_unit", "neg_half_open_unit", "none") and not arg:
        return CubeSpec(kind)
    raise ValueError(f"unknown corrector {text!r}")


class Evaluable(Protocol):
    dim: int

    def __call__(self, x: Iterable[RationalLike]) -> Fraction: ...


@dataclass(frozen=True, eq=True)
class PointMassFunction:
    """A function ``R^n -> Q_{>=0}``: finitely many point values, optionally
    maxed with the characteristic function of ``char_part``."""

    dim: int
    support: Mapping[Point, Fraction] = field(default_factory=dict)
    char_part: SetExpr | None = None

    def __post_init__(self) -> None:
        clean: dict[Point, Fraction] = {}
        for x, v in dict(self.support).items():
            x, v = as_point(x), as_fraction(v)
            if len(x) != self.dim:
                raise ValueError(f"support point {x} does not have dimension {self.dim}")
            if v < 0:
                raise ValueError("function values must be nonnegative")
            if v > 0:
                clean[x] = v
        object.__setattr__(self, "support", clean)
        if self.char_part is not None and self.char_part.dim != self.dim:
            raise ValueError("characteristic part has the wrong dimension")

    @classmethod
    def characteristic(cls, S: SetExpr) -> PointMassFunction:
        return cls(S.dim, {}, S)

    @classmethod
    def from_values(cls, values: Mapping[Iterable[RationalLike], RationalLike],
                    dim: int | None = None) -> PointMassFunction:
        items = {as_point(x): as_fraction(v) for x, v in values.items()}
        if dim is None:
            if not items:
                raise ValueError("cannot infer the dimension of an empty function")
            dim = len(next(iter(items)))
        return cls(dim, items)

    def __call__(self, x: Iterable[RationalLike]) -> Fraction:
        return evaluate(self, x)

    def is_finite(self) -> bool:
        return self.char_part is None or self.char_part.is_finite()

    def point_values(self) -> dict[Point, Fraction]:
        """All nonzero values; only defined when the function has finite support."""
        if not self.is_finite():
            raise ValueError("function has a non-finite characteristic part")
        out = dict(self.support)
        if self.char_part is not None:
            for p in self.char_part.points:
                out[p] = max(out.get(p, Fraction(0)), Fraction(1))
        return out

    def scaled(self, c: RationalLike) -> PointMassFunction:
        c = as_fraction(c)
        if self.char_part is not None:
            raise ValueError("only finitely supported functions can be rescaled")
        return PointMassFunction(self.dim, {x: c * v for x, v in self.support.items()})


def evaluate(phi: PointMassFunction, x: Iterable[RationalLike]) -> Fraction:
    """``phi(x)``: the larger of the point value and the characteristic indicator."""
    x = as_point(x)
    if len(x) != phi.dim:
        raise ValueError(f"point of dimension {len(x)} passed to a {phi.dim}-dimensional function")
    v = phi.support.get(x, Fraction(0))
    if v < 1 and phi.char_part is not None and membership(phi.char_part, x):
        return Fraction(1)
    return v


class SupConvolution:
    """``z -> sup_{u in C} h(z + u)``, evaluated lazily at query points."""

    def __init__(self, h: PointMassFunction, cube: CubeSpec):
        self.h = h
        self.cube = cube
        self.dim = h.dim
        self._box = cube.as_box(h.dim)
        self._char = None
        if h.char_part is not None:
            # sup over u in C of 1_M(z + u) is 1 exactly on M - C
            self._char = minkowski_sum(h.char_part, cube.reflected(h.dim))

    @property
    def char_part(self) -> SetExpr | None:
        return self._char

    def __call__(self, z: Iterable[RationalLike]) -> Fraction:
        z = as_point(z)
        if len(z) != self.dim:
            raise ValueError("dimension mismatch")
        best = Fraction(0)
        for p, v in self.h.support.items():
            if v > best:
                offset = tuple(a - b for a, b in zip(p, z))
                inside = self._box.contains(offset) if self._box else all(c == 0 for c in offset)
                if inside:
                    best = v
        if best < 1 and self._char is not None and membership(self._char, z):
            best = Fraction(1)
        return best


def sup_conv(h: PointMassFunction, cube: CubeSpec) -> SupConvolution:
    return SupConvolution(h, cube)


def lattice_sum(phi: Evaluable, omega: SetExpr) -> Fraction:
    """``sum over z in omega ∩ Z^n of phi(z)``."""
    return sum((phi(z) for z in lattice_points(omega)), Fraction(0))


def cavalieri_sum(phi: Evaluable, omega: SetExpr) -> Fraction:
    """The lattice sum recomputed level by level:
    ``sum_i (k_i - k_{i-1}) * #{z in omega ∩ Z^n : phi(z) >= k_i}``."""
    values = [phi(z) for z in lattice_points(omega)]
    ladder = sorted({v for v in values if v > 0})
    total, prev = Fraction(0), Fraction(0)
    for k in ladder:
        total += (k - prev) * sum(1 for v in values if v >= k)
        prev = k
    return total


# ---------------------------------------------------------------------------
# The p-mean hypothesis h((1-t)x + t y) >= M_p(f(x), g(y), t)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HypothesisViolation:
    x: Point
    y: Point
    z: Point
    required: ExactValue
    actual: Fraction

    def to_json(self) -> dict:
        from .exactnum import format_rational, value_to_json

        def pt(p):
            return [format_rational(c) for c in p]

        return {"x": pt(self.x), "y": pt(self.y), "z": pt(self.z),
                "required": value_to_json(self.required), "actual": format_rational(self.actual)}


def _pieces(phi: PointMassFunction, domain: SetExpr) -> list[tuple[Box, Fraction]]:
    """Regions of ``domain`` with a known constant value of ``phi``; points are degenerate boxes."""
    out: dict[Point, Fraction] = {x: v for x, v in phi.support.items() if membership(domain, x)}
    boxes: list[Box] = []
    if phi.char_part is not None:
        region = intersect(phi.char_part, domain)
        for p in region.points:
            out[p] = max(out.get(p, Fraction(0)), Fraction(1))
        boxes = list(region.boxes)
    pieces = [(Box(tuple(Interval1D.point(c) for c in p)), v) for p, v in sorted(out.items())]
    pieces += [(b, Fraction(1)) for b in boxes]
    return pieces


def _combine(P: Box, Q: Box, lam: Fraction) -> Box:
    return Box(tuple(a.scale(1 - lam) + b.scale(lam) for a, b in zip(P.factors, Q.factors)))


def _preimages(P: Box, Q: Box, lam: Fraction, z: Point) -> tuple[Point, Point]:
    """``x in P``, ``y in Q`` with ``(1-lam) x + lam y = z`` for ``z`` in the combined box."""
    xs, ys = [], []
    for a, b, c in zip(P.factors, Q.factors, z):
        width = (1 - lam) * (a.hi - a.lo) + lam * (b.hi - b.lo)
        t = Fraction(0) if width == 0 else (c - (1 - lam) * a.lo - lam * b.lo) / width
        xs.append(a.lo + t * (a.hi - a.lo))
        ys.append(b.lo + t * (b.hi - b.lo))
    return tuple(xs), tuple(ys)


def _below(actual: Fraction, required: ExactValue) -> bool:
    return compare(actual, required).relation is Relation.LESS


def _box_violation(h: PointMassFunction, T: Box, required: ExactValue) -> Point | None:
    """A point of the non-degenerate box ``T`` where ``h < required``."""
    if h.char_part is not None and not _below(Fraction(1), required):
        # the characteristic part already meets the bound; look where T leaves it
        cells = uncovered_cells(h.char_part, T)
    else:
        cells = (c for c in uncovered_cells(SetExpr.empty(T.dim), T) if any(a != b for a, b in c))
    for cell in cells:
        if all(a == b for a, b in cell):
            z = cell_point(cell)
            if _below(evaluate(h, z), required):
                return z
            continue
        # an open cell has infinitely many points but h has finitely many point masses
        k = 0
        while (z := cell_point(cell, k)) in h.support and not _below(h.support[z], required):
            k += 1
        return z
    return None


def check_hypothesis(f: PointMassFunction, g: PointMassFunction, h: PointMassFunction,
                     K: SetExpr, L: SetExpr, lam: RationalLike,
                     p: ExtendedExponent) -> HypothesisViolation | None:
    """First pair ``x in K``, ``y in L`` breaking ``h((1-lam)x + lam y) >= M_p(f(x), g(y), lam)``.

    Pairs with ``f(x) g(y) = 0`` impose nothing.  Returns None when the
    hypothesis holds everywhere.
    """
    lam = as_fraction(lam)
    for P, a in _pieces(f, K):
        for Q, b in _pieces(g, L):
            required = p_mean(a, b, lam, p)
            T = _combine(P, Q, lam)
            if T.is_point:
                z = tuple(fac.lo for fac in T.factors)
                actual = evaluate(h, z)
                if _below(actual, required):
                    x, y = _preimages(P, Q, lam, z)
                    return HypothesisViolation(x, y, z, required, actual)
                continue
            z = _box_violation(h, T, required)
            if z is not None:
                x, y = _preimages(P, Q, lam, z)
                return HypothesisViolation(x, y, z, required, evaluate(h, z))
    return None


def make_admissible_h(f: PointMassFunction, g: PointMassFunction, K: SetExpr, L: SetExpr,
                      lam: RationalLike, p: ExtendedExponent,
                      precision_bits: int = 8) -> PointMassFunction:
    """Smallest dyadic ``h`` on the combination points satisfying the p-mean hypothesis."""
    lam = as_fraction(lam)
    fv = {x: v for x, v in f.point_values().items() if membership(K, x)}
    gv = {y: v for y, v in g.point_values().items() if membership(L, y)}
    best: dict[Point, ExactValue] = {}
    for x, a in sorted(fv.items()):
        for y, b in sorted(gv.items()):
            z = tuple((1 - lam) * s + lam * t for s, t in zip(x, y))
            m = p_mean(a, b, lam, p)
            if z not in best or compare(best[z], m).relation is Relation.LESS:
                best[z] = m
    return PointMassFunction(f.dim, {z: dyadic_ceil(m, precision_bits) for z, m in best.items()})


def pull_back(phi: PointMassFunction, basis) -> PointMassFunction:
    """``x -> phi(φ(x))`` for a lattice basis ``φ``."""
    from .sets import lattice_transform

    support = {basis.solve(x): v for x, v in phi.support.items()}
    char = None if phi.char_part is None else lattice_transform(phi.char_part, basis)
    return PointMassFunction(phi.dim, support, char)

