"""Bounded subsets of R^n: finite unions of rational boxes plus finite point sets."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .exactnum import RationalLike, as_fraction, is_integral, rat_ceil, rat_floor

Point = tuple[Fraction, ...]
IntPoint = tuple[int, ...]

# grids with more cells than this fall back to hashing lattice points
_GRID_LIMIT = 4_000_000


def as_point(x: Iterable[RationalLike]) -> Point:
    return tuple(as_fraction(c) for c in x)


@dataclass(frozen=True)
class Interval1D:
    lo: Fraction
    hi: Fraction
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", as_fraction(self.lo))
        object.__setattr__(self, "hi", as_fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval: lo {self.lo} > hi {self.hi}")
        if self.lo == self.hi and (self.lo_open or self.hi_open):
            raise ValueError("a degenerate interval must be closed at both ends")

    @classmethod
    def closed(cls, lo: RationalLike, hi: RationalLike) -> Interval1D:
        return cls(as_fraction(lo), as_fraction(hi))

    @classmethod
    def open(cls, lo: RationalLike, hi: RationalLike) -> Interval1D:
        return cls(as_fraction(lo), as_fraction(hi), True, True)

    @classmethod
    def point(cls, x: RationalLike) -> Interval1D:
        x = as_fraction(x)
        return cls(x, x)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: Fraction) -> bool:
        if x < self.lo or (x == self.lo and self.lo_open):
            return False
        return not (x > self.hi or (x == self.hi and self.hi_open))

    def integer_range(self) -> tuple[int, int]:
        """First and last integers inside; ``first > last`` means none."""
        first = self.lo + 1 if self.lo_open and is_integral(self.lo) else rat_ceil(self.lo)
        last = self.hi - 1 if self.hi_open and is_integral(self.hi) else rat_floor(self.hi)
        return int(first), int(last)

    def lattice_count(self) -> int:
        first, last = self.integer_range()
        return max(0, last - first + 1)

    def __add__(self, other: Interval1D) -> Interval1D:
        return Interval1D(self.lo + other.lo, self.hi + other.hi,
                          self.lo_open or other.lo_open, self.hi_open or other.hi_open)

    def shift(self, t: Fraction) -> Interval1D:
        return Interval1D(self.lo + t, self.hi + t, self.lo_open, self.hi_open)

    def scale(self, c: Fraction) -> Interval1D:
        if c > 0:
            return Interval1D(c * self.lo, c * self.hi, self.lo_open, self.hi_open)
        if c < 0:
            return Interval1D(c * self.hi, c * self.lo, self.hi_open, self.lo_open)
        return Interval1D.point(0)

    def intersect(self, other: Interval1D) -> Interval1D | None:
        if self.lo > other.lo:
            lo, lo_open = self.lo, self.lo_open
        elif self.lo < other.lo:
            lo, lo_open = other.lo, other.lo_open
        else:
            lo, lo_open = self.lo, self.lo_open or other.lo_open
        if self.hi < other.hi:
            hi, hi_open = self.hi, self.hi_open
        elif self.hi > other.hi:
            hi, hi_open = other.hi, other.hi_open
        else:
            hi, hi_open = self.hi, self.hi_open or other.hi_open
        if lo > hi or (lo == hi and (lo_open or hi_open)):
            return None
        return Interval1D(lo, hi, lo_open, hi_open)

    def covers(self, other: Interval1D) -> bool:
        """Whether ``other`` is a subset of this interval."""
        lo_ok = self.lo < other.lo or (self.lo == other.lo and (not self.lo_open or other.lo_open))
        hi_ok = self.hi > other.hi or (self.hi == other.hi and (not self.hi_open or other.hi_open))
        return lo_ok and hi_ok

    def __str__(self) -> str:
        if self.is_point:
            return f"{{{self.lo}}}"
        return f"{'(' if self.lo_open else '['}{self.lo}, {self.hi}{')' if self.hi_open else ']'}"


@dataclass(frozen=True)
class Box:
    factors: tuple[Interval1D, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("a box needs at least one factor")

    @classmethod
    def closed(cls, lo: Sequence[RationalLike], hi: Sequence[RationalLike]) -> Box:
        return cls(tuple(Interval1D.closed(a, b) for a, b in zip(lo, hi, strict=True)))

    @classmethod
    def cube(cls, factor: Interval1D, n: int) -> Box:
        return cls((factor,) * n)

    @property
    def dim(self) -> int:
        return len(self.factors)

    @property
    def is_point(self) -> bool:
        return all(f.is_point for f in self.factors)

    def contains(self, x: Point) -> bool:
        return all(f.contains(c) for f, c in zip(self.factors, x))

    def integer_ranges(self) -> list[tuple[int, int]]:
        return [f.integer_range() for f in self.factors]

    def lattice_count(self) -> int:
        count = 1
        for f in self.factors:
            count *= f.lattice_count()
        return count

    def translate(self, t: Point) -> Box:
        return Box(tuple(f.shift(c) for f, c in zip(self.factors, t)))

    def __add__(self, other: Box) -> Box:
        return Box(tuple(a + b for a, b in zip(self.factors, other.factors)))

    def intersect(self, other: Box) -> Box | None:
        out = []
        for a, b in zip(self.factors, other.factors):
            c = a.intersect(b)
            if c is None:
                return None
            out.append(c)
        return Box(tuple(out))

    def covers(self, other: Box) -> bool:
        return all(a.covers(b) for a, b in zip(self.factors, other.factors))

    def __str__(self) -> str:
        return " x ".join(str(f) for f in self.factors)


@dataclass(frozen=True)
class SetExpr:
    """The set ``union(boxes) ∪ points`` in R^dim.

    An empty SetExpr only arises as the result of a section or an
    intersection; the verifiers reject empty inputs.
    """

    dim: int
    boxes: tuple[Box, ...] = ()
    points: frozenset[Point] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        boxes: dict[Box, None] = {}
        points = set(as_point(p) for p in self.points)
        for b in self.boxes:
            if b.dim != self.dim:
                raise ValueError(f"box of dimension {b.dim} in a {self.dim}-dimensional set")
            if b.is_point:
                points.add(tuple(f.lo for f in b.factors))
            else:
                boxes[b] = None
        for p in points:
            if len(p) != self.dim:
                raise ValueError(f"point {p} does not have dimension {self.dim}")
        object.__setattr__(self, "boxes", tuple(boxes))
        object.__setattr__(self, "points", frozenset(points))

    # -- constructors -------------------------------------------------------

    @classmethod
    def empty(cls, dim: int) -> SetExpr:
        return cls(dim)

    @classmethod
    def from_points(cls, points: Iterable[Iterable[RationalLike]], dim: int | None = None) -> SetExpr:
        pts = [as_point(p) for p in points]
        if dim is None:
            if not pts:
                raise ValueError("cannot infer the dimension of an empty point set")
            dim = len(pts[0])
        return cls(dim, (), frozenset(pts))

    @classmethod
    def from_boxes(cls, boxes: Iterable[Box]) -> SetExpr:
        boxes = tuple(boxes)
        return cls(boxes[0].dim, boxes)

    @classmethod
    def interval(cls, lo: RationalLike, hi: RationalLike,
                 lo_open: bool = False, hi_open: bool = False) -> SetExpr:
        return cls(1, (Box((Interval1D(as_fraction(lo), as_fraction(hi), lo_open, hi_open),)),))

    @classmethod
    def cube(cls, lo: RationalLike, hi: RationalLike, n: int,
             lo_open: bool = False, hi_open: bool = False) -> SetExpr:
        factor = Interval1D(as_fraction(lo), as_fraction(hi), lo_open, hi_open)
        return cls(n, (Box.cube(factor, n),))

    @classmethod
    def lattice_cube(cls, lo: int, hi: int, n: int) -> SetExpr:
        """The finite point set ``{lo, ..., hi}^n``."""
        return cls.from_points(itertools.product(range(lo, hi + 1), repeat=n), n)

    # -- queries ----------------------------------------------------------

    def is_empty(self) -> bool:
        return not self.boxes and not self.points

    def is_finite(self) -> bool:
        return not self.boxes

    def __contains__(self, x: Iterable[RationalLike]) -> bool:
        return membership(self, x)

    def __str__(self) -> str:
        parts = [str(b) for b in self.boxes]
        if self.points:
            pts = sorted(self.points)
            shown = ", ".join("(" + ", ".join(str(c) for c in p) + ")" for p in pts[:6])
            parts.append("{" + shown + (", ..." if len(pts) > 6 else "") + "}")
        return " ∪ ".join(parts) if parts else "∅"


def _check_dims(*sets: SetExpr) -> int:
    dims = {s.dim for s in sets}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def scale(S: SetExpr, c: RationalLike) -> SetExpr:
    """``{c * s : s in S}`` for ``c >= 0``."""
    c = as_fraction(c)
    if c < 0:
        raise ValueError("sets are only scaled by nonnegative factors")
    if S.is_empty():
        return S
    if c == 0:
        return SetExpr(S.dim, (), frozenset({(Fraction(0),) * S.dim}))
    boxes = tuple(Box(tuple(f.scale(c) for f in b.factors)) for b in S.boxes)
    points = frozenset(tuple(c * x for x in p) for p in S.points)
    return SetExpr(S.dim, boxes, points)


def translate(S: SetExpr, t: Iterable[RationalLike]) -> SetExpr:
    t = as_point(t)
    return SetExpr(S.dim, tuple(b.translate(t) for b in S.boxes),
                   frozenset(tuple(a + b for a, b in zip(p, t)) for p in S.points))


def minkowski_sum(A: SetExpr, B: SetExpr) -> SetExpr:
    """``{a + b : a in A, b in B}``; endpoint openness propagates by OR."""
    n = _check_dims(A, B)
    boxes: list[Box] = [a + b for a in A.boxes for b in B.boxes]
    boxes += [b.translate(p) for p in A.points for b in B.boxes]
    boxes += [a.translate(q) for a in A.boxes for q in B.points]
    points = {tuple(x + y for x, y in zip(p, q)) for p in A.points for q in B.points}
    return SetExpr(n, tuple(boxes), frozenset(points))


def membership(S: SetExpr, x: Iterable[RationalLike]) -> bool:
    x = as_point(x)
    if len(x) != S.dim:
        raise ValueError(f"point of dimension {len(x)} queried in a {S.dim}-dimensional set")
    if x in S.points:
        return True
    return any(b.contains(x) for b in S.boxes)


def intersect(S: SetExpr, T: SetExpr) -> SetExpr:
    n = _check_dims(S, T)
    boxes = [c for a in S.boxes for b in T.boxes if (c := a.intersect(b)) is not None]
    points = {p for p in S.points if membership(T, p)}
    points |= {p for p in T.points if membership(S, p)}
    return SetExpr(n, tuple(boxes), frozenset(points))


# ---------------------------------------------------------------------------
# Lattice points
# ---------------------------------------------------------------------------

def _integer_points(S: SetExpr) -> list[IntPoint]:
    return [tuple(int(c) for c in p) for p in S.points if all(is_integral(c) for c in p)]


def lattice_points(S: SetExpr) -> set[IntPoint]:
    """``S ∩ Z^n`` as a set of integer tuples."""
    pts = set(_integer_points(S))
    for b in S.boxes:
        ranges = b.integer_ranges()
        if any(first > last for first, last in ranges):
            continue
        pts.update(itertools.product(*(range(first, last + 1) for first, last in ranges)))
    return pts


def count_lattice(S: SetExpr) -> int:
    """``G_n(S) = |S ∩ Z^n|``, deduplicating overlaps."""
    if S.is_empty():
        return 0
    if len(S.boxes) == 1 and not S.points:
        return S.boxes[0].lattice_count()
    if not S.boxes:
        return len(_integer_points(S))
    return _union_count([b.integer_ranges() for b in S.boxes], _integer_points(S), S.dim,
                        lambda: len(lattice_points(S)))


def count_combination_translates(P: Iterable[Point], Q: Iterable[Point], alpha: Fraction,
                                 beta: Fraction, box: Box) -> int:
    """``|(alpha P + beta Q + box) ∩ Z^n|`` for finite point sets ``P`` and ``Q``.

    All coordinates are brought to one common denominator ``D`` so the core
    ``alpha P + beta Q`` and every integer range come out of integer numpy
    arithmetic; the ranges are then marked on a grid as in :func:`count_lattice`.
    """
    P, Q = list(P), list(Q)
    if not P or not Q:
        return 0
    n = box.dim
    dc = math.lcm(*(c.denominator for c in itertools.chain(*P, *Q)))
    db = math.lcm(*(e.denominator for f in box.factors for e in (f.lo, f.hi)))
    D = math.lcm(alpha.denominator, beta.denominator) * dc * db
    scale_p, scale_q = alpha * D / dc, beta * D / dc  # integers by the choice of D
    big = max(abs(int(c * dc)) for c in itertools.chain(*P, *Q)) * max(scale_p, scale_q, 1)
    if big + D * max(abs(e) + 1 for f in box.factors for e in (f.lo, f.hi)) > 2 ** 60:
        core = {tuple(alpha * a + beta * b for a, b in zip(p, q)) for p in P for q in Q}
        return count_lattice(SetExpr(n, tuple(box.translate(z) for z in core)))
    ip = np.array([[int(c * dc) for c in p] for p in P], dtype=np.int64) * int(scale_p)
    iq = np.array([[int(c * dc) for c in q] for q in Q], dtype=np.int64) * int(scale_q)
    core = np.unique((ip[:, None, :] + iq[None, :, :]).reshape(-1, n), axis=0)
    lo = core + np.array([int(f.lo * D) for f in box.factors], dtype=np.int64)
    hi = core + np.array([int(f.hi * D) for f in box.factors], dtype=np.int64)
    lo_open = np.array([f.lo_open for f in box.factors])
    hi_open = np.array([f.hi_open for f in box.factors])
    # smallest integer >= lo/D (> when open) and largest <= hi/D (< when open)
    first = np.where(lo_open, lo // D + 1, -((-lo) // D))
    last = np.where(hi_open, -((-hi) // D) - 1, hi // D)
    ranges = [list(zip(f.tolist(), t.tolist())) for f, t in zip(first, last)]

    def fallback() -> int:
        pts: set[IntPoint] = set()
        for r in ranges:
            pts.update(itertools.product(*(range(f, t + 1) for f, t in r)))
        return len(pts)
    return _union_count(ranges, [], n, fallback)


def _union_count(ranges: list[list[tuple[int, int]]], ints: list[IntPoint], dim: int, fallback) -> int:
    """Size of the union of integer ranges (boxes) and integer points, marked on a boolean grid."""
    ranges = [r for r in ranges if all(f <= t for f, t in r)]
    if not ranges:
        return len(set(ints))
    lo = [min([r[i][0] for r in ranges] + [p[i] for p in ints]) for i in range(dim)]
    hi = [max([r[i][1] for r in ranges] + [p[i] for p in ints]) for i in range(dim)]
    shape = [h - l + 1 for l, h in zip(lo, hi)]
    if np.prod(shape, dtype=float) > _GRID_LIMIT:
        return fallback()
    grid = np.zeros(shape, dtype=bool)
    for r in ranges:
        grid[tuple(slice(f - l, t - l + 1) for (f, t), l in zip(r, lo))] = True
    for p in ints:
        grid[tuple(c - l for c, l in zip(p, lo))] = True
    return int(grid.sum())


def bounding_box(S: SetExpr) -> tuple[Point, Point]:
    if S.is_empty():
        raise ValueError("the empty set has no bounding box")
    lo, hi = [], []
    for i in range(S.dim):
        vals_lo = [b.factors[i].lo for b in S.boxes] + [p[i] for p in S.points]
        vals_hi = [b.factors[i].hi for b in S.boxes] + [p[i] for p in S.points]
        lo.append(min(vals_lo))
        hi.append(max(vals_hi))
    return tuple(lo), tuple(hi)


def count_lattice_brute(S: SetExpr) -> int:
    """Reference count: test every integer point of the bounding box."""
    if S.is_empty():
        return 0
    lo, hi = bounding_box(S)
    axes = [range(rat_ceil(a), rat_floor(b) + 1) for a, b in zip(lo, hi)]
    return sum(1 for z in itertools.product(*axes) if membership(S, z))


# ---------------------------------------------------------------------------
# Containment
# ---------------------------------------------------------------------------

Cell = tuple[tuple[Fraction, Fraction], ...]


def _pieces(f: Interval1D, cuts: Iterable[Fraction]) -> list[tuple[Fraction, Fraction]]:
    """Elementary pieces of ``f`` cut at ``cuts``: ``(a, a)`` is the point a, ``(a, b)`` the open gap."""
    marks = sorted({f.lo, f.hi, *(c for c in cuts if f.lo < c < f.hi)})
    out = [(m, m) for m in marks if f.contains(m)]
    out += list(zip(marks, marks[1:]))
    return out


def cell_point(cell: Cell, k: int = 0) -> Point:
    """A point of ``cell``; varying ``k`` gives distinct points in every open gap."""
    return tuple(a if a == b else a + (b - a) / (k + 2) for a, b in cell)


def uncovered_cells(outer: SetExpr, box: Box) -> Iterator[Cell]:
    """Cells of ``box`` disjoint from ``outer``.

    The axes are cut at every endpoint occurring in ``outer``; membership in
    ``outer`` is constant on each resulting cell, so one test per cell is exact.
    """
    axes = []
    for i, f in enumerate(box.factors):
        cuts = [c for o in outer.boxes for c in (o.factors[i].lo, o.factors[i].hi)]
        cuts += [p[i] for p in outer.points]
        axes.append(_pieces(f, cuts))
    for cell in itertools.product(*axes):
        if not membership(outer, cell_point(cell)):
            yield cell


def uncovered_point(outer: SetExpr, inner: SetExpr) -> Point | None:
    """A point of ``inner`` missing from ``outer``, or None if ``inner ⊆ outer``."""
    _check_dims(outer, inner)
    for p in sorted(inner.points):
        if not membership(outer, p):
            return p
    for b in inner.boxes:
        if any(o.covers(b) for o in outer.boxes):
            continue
        for cell in uncovered_cells(outer, b):
            return cell_point(cell)
    return None


def contains(outer: SetExpr, inner: SetExpr) -> bool:
    return uncovered_point(outer, inner) is None


# ---------------------------------------------------------------------------
# Sections and one-dimensional structure
# ---------------------------------------------------------------------------

def section(S: SetExpr, t: RationalLike) -> SetExpr:
    """``S(t) = {x in R^(n-1) : (x, t) in S}``."""
    if S.dim < 2:
        raise ValueError("sections need dimension at least 2")
    t = as_fraction(t)
    boxes = tuple(Box(b.factors[:-1]) for b in S.boxes if b.factors[-1].contains(t))
    points = frozenset(p[:-1] for p in S.points if p[-1] == t)
    return SetExpr(S.dim - 1, boxes, points)


def project_last(S: SetExpr) -> SetExpr:
    """Orthogonal projection onto the last coordinate axis."""
    boxes = tuple(Box((b.factors[-1],)) for b in S.boxes)
    points = frozenset((p[-1],) for p in S.points)
    return SetExpr(1, boxes, points)


def normalize_1d(S: SetExpr, closed_hull: bool = False) -> list[Interval1D]:
    """Sorted, pairwise disjoint intervals whose union is ``S``.

    With ``closed_hull`` the union of ``[floor(x), ceil(x)]`` over ``x in S``
    is returned instead; all its endpoints are closed integers.
    """
    if S.dim != 1:
        raise ValueError("normalize_1d needs a one-dimensional set")
    if S.is_empty():
        raise ValueError("normalize_1d needs a non-empty set")
    parts = [b.factors[0] for b in S.boxes] + [Interval1D.point(p[0]) for p in S.points]
    if closed_hull:
        parts = [Interval1D(Fraction(rat_floor(f.lo)), Fraction(rat_ceil(f.hi))) for f in parts]
    parts.sort(key=lambda f: (f.lo, f.lo_open))
    merged = [parts[0]]
    for f in parts[1:]:
        cur = merged[-1]
        touching = f.lo < cur.hi or (f.lo == cur.hi and not (f.lo_open and cur.hi_open))
        if not touching:
            merged.append(f)
            continue
        if f.hi > cur.hi:
            hi, hi_open = f.hi, f.hi_open
        elif f.hi < cur.hi:
            hi, hi_open = cur.hi, cur.hi_open
        else:
            hi, hi_open = cur.hi, cur.hi_open and f.hi_open
        merged[-1] = Interval1D(cur.lo, hi, cur.lo_open, hi_open)
    return merged


def noninteger_endpoints(intervals: Iterable[Interval1D]) -> int:
    """Number of non-integer endpoints of a disjoint union of compact intervals."""
    total = 0
    for f in intervals:
        if f.lo_open or f.hi_open:
            raise ValueError(f"{f} is not compact")
        total += (not is_integral(f.lo)) + (not is_integral(f.hi))
    return total


def set_from_intervals(intervals: Iterable[Interval1D]) -> SetExpr:
    return SetExpr(1, tuple(Box((f,)) for f in intervals))


# ---------------------------------------------------------------------------
# Lattices with a basis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeBasis:
    """Columns ``v_1..v_n`` of ``matrix`` span the lattice ``φ(Z^n)``, ``φ(x) = matrix @ x``."""

    matrix: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(as_fraction(c) for c in row) for row in self.matrix)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ValueError("a lattice basis must be a square matrix")
        object.__setattr__(self, "matrix", rows)
        if _det(rows) == 0:
            raise ValueError("singular lattice basis")

    @classmethod
    def diagonal(cls, entries: Sequence[RationalLike]) -> LatticeBasis:
        n = len(entries)
        return cls(tuple(tuple(entries[i] if i == j else 0 for j in range(n)) for i in range(n)))

    @classmethod
    def identity(cls, n: int) -> LatticeBasis:
        return cls.diagonal([1] * n)

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def is_diagonal(self) -> bool:
        return all(c == 0 for i, row in enumerate(self.matrix) for j, c in enumerate(row) if i != j)

    def diagonal_entries(self) -> tuple[Fraction, ...]:
        return tuple(self.matrix[i][i] for i in range(self.dim))

    def apply(self, x: Point) -> Point:
        return tuple(sum((c * xi for c, xi in zip(row, x)), Fraction(0)) for row in self.matrix)

    def solve(self, y: Point) -> Point:
        """``φ^{-1}(y)`` by exact Gaussian elimination."""
        n = self.dim
        a = [list(row) + [as_fraction(v)] for row, v in zip(self.matrix, y)]
        for col in range(n):
            piv = next(r for r in range(col, n) if a[r][col] != 0)
            a[col], a[piv] = a[piv], a[col]
            for r in range(n):
                if r != col and a[r][col] != 0:
                    f = a[r][col] / a[col][col]
                    a[r] = [x - f * z for x, z in zip(a[r], a[col])]
        return tuple(a[i][n] / a[i][i] for i in range(n))


def _det(m: tuple[tuple[Fraction, ...], ...]) -> Fraction:
    a = [list(r) for r in m]
    n, det = len(a), Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            a[r] = [x - f * z for x, z in zip(a[r], a[col])]
    return det


def lattice_transform(S: SetExpr, B: LatticeBasis) -> SetExpr:
    """Pull ``S`` back along ``φ``.

    Points and diagonal bases are exact.  For a non-diagonal basis each box
    is replaced by the integer points ``x`` with ``φ(x)`` in the box, which
    is all a lattice count needs.
    """
    if B.dim != S.dim:
        raise ValueError("basis and set dimensions differ")
    points = {B.solve(p) for p in S.points}
    if B.is_diagonal():
        d = B.diagonal_entries()
        boxes = tuple(Box(tuple(f.scale(1 / c) for f, c in zip(b.factors, d))) for b in S.boxes)
        return SetExpr(S.dim, boxes, frozenset(points))
    for b in S.boxes:
        corners = [B.solve(c) for c in itertools.product(*((f.lo, f.hi) for f in b.factors))]
        axes = [range(rat_ceil(min(c[i] for c in corners)), rat_floor(max(c[i] for c in corners)) + 1)
                for i in range(S.dim)]
        for x in itertools.product(*axes):
            xf = tuple(Fraction(c) for c in x)
            if b.contains(B.apply(xf)):
                points.add(xf)
    return SetExpr(S.dim, (), frozenset(points))
