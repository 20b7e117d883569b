"""Exact rationals, p-means and certified ordering of sums of radicals.

Every quantity that ends up on either side of an inequality is kept exact.
Values of the form ``sum(c_i * r_i ** (1/v))`` are :class:`RadicalSum`;
values that need a further rational power (for instance a p-mean with
``p = 2/3``) are :class:`RadicalPower`.  :func:`compare` decides the
ordering of any two such values: equality algebraically, strict
inequality by dyadic interval refinement.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

INF = math.inf

#: An exponent in ``Q ∪ {+inf, -inf}``; infinities are the floats ``±math.inf``.
ExtendedExponent = Union[Fraction, float]
RationalLike = Union[int, Fraction, str]


# ---------------------------------------------------------------------------
# Rationals
# ---------------------------------------------------------------------------

def as_fraction(x: RationalLike) -> Fraction:
    """Coerce ``x`` to a Fraction without going through binary floats."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"cannot use {type(x).__name__} {x!r} as an exact rational")


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if not text:
        raise ValueError("empty rational")
    if any(c in text for c in ".eE") and "/" not in text:
        # decimal literals are exact in Fraction's parser, but we keep the
        # documented "p/q" or "p" wire format strict
        raise ValueError(f"rationals must be written as 'p/q' or 'p', got {text!r}")
    return Fraction(text)


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_exponent(text: RationalLike | float) -> ExtendedExponent:
    if isinstance(text, float):
        if math.isinf(text):
            return text
        raise TypeError("finite exponents must be exact rationals")
    if isinstance(text, str):
        t = text.strip().lower()
        if t in ("inf", "+inf", "infinity", "∞", "+∞"):
            return INF
        if t in ("-inf", "-infinity", "-∞"):
            return -INF
    return as_fraction(text)


def format_exponent(p: ExtendedExponent) -> str:
    if p == INF:
        return "inf"
    if p == -INF:
        return "-inf"
    return format_rational(p)


def rat_floor(x: RationalLike) -> int:
    """Greatest integer ``<= x``."""
    x = as_fraction(x)
    return x.numerator // x.denominator


def rat_ceil(x: RationalLike) -> int:
    """Least integer ``>= x``."""
    x = as_fraction(x)
    return -((-x.numerator) // x.denominator)


def is_integral(x: Fraction) -> bool:
    return x.denominator == 1


# ---------------------------------------------------------------------------
# Integer roots and power-free parts
# ---------------------------------------------------------------------------

def iroot(n: int, k: int) -> int:
    """Floor of the real k-th root of a nonnegative integer."""
    if n < 0:
        raise ValueError("iroot of a negative integer")
    if k < 1:
        raise ValueError("root index must be positive")
    if n < 2 or k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    # Newton iteration from an overestimate
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            return x
        x = y


_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71)


def _is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    # these bases are deterministic below 3.3e24
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int) -> int:
    """A nontrivial factor of the odd composite ``n``."""
    rng = random.Random(n)  # deterministic per input
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


@lru_cache(maxsize=65536)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization of a positive integer as sorted ``(prime, exponent)`` pairs."""
    if n < 1:
        raise ValueError("factorize expects a positive integer")
    found: dict[int, int] = {}
    for p in _SMALL_PRIMES:
        while n % p == 0:
            found[p] = found.get(p, 0) + 1
            n //= p
    p = 73
    while n > 1 and p * p <= n and p < 2000:
        while n % p == 0:
            found[p] = found.get(p, 0) + 1
            n //= p
        p += 2
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if _is_probable_prime(m):
            found[m] = found.get(m, 0) + 1
            continue
        r = math.isqrt(m)
        if r * r == m:
            stack += [r, r]
            continue
        d = _pollard_brent(m)
        stack += [d, m // d]
    return tuple(sorted(found.items()))


def power_split(n: int, v: int) -> tuple[int, int]:
    """Write ``n = outside**v * inside`` with ``inside`` v-th-power-free."""
    if n == 0:
        return 0, 0
    outside = inside = 1
    for p, e in factorize(n):
        q, r = divmod(e, v)
        outside *= p ** q
        inside *= p ** r
    return outside, inside


def _root_bounds(r: Fraction, v: int, bits: int) -> tuple[Fraction, Fraction]:
    """Dyadic enclosure of ``r ** (1/v)`` with ``bits`` fractional bits."""
    if r == 0:
        return Fraction(0), Fraction(0)
    scaled = r.numerator << (bits * v)
    lo = iroot(scaled // r.denominator, v)
    exact = lo ** v * r.denominator == scaled
    scale = 1 << bits
    return Fraction(lo, scale), Fraction(lo if exact else lo + 1, scale)


# ---------------------------------------------------------------------------
# Radical sums
# ---------------------------------------------------------------------------

Term = tuple[Fraction, Fraction]


def _normalize_terms(degree: int, terms: Iterable[Term]) -> tuple[Term, ...]:
    grouped: dict[int, Fraction] = {}
    for coeff, radicand in terms:
        if coeff == 0 or radicand == 0:
            continue
        # r^(1/v) = (p * q^(v-1))^(1/v) / q, then pull out v-th powers
        num = radicand.numerator * radicand.denominator ** (degree - 1)
        out, inside = power_split(num, degree)
        c = coeff * Fraction(out, radicand.denominator)
        grouped[inside] = grouped.get(inside, Fraction(0)) + c
    return tuple((c, Fraction(r)) for r, c in sorted(grouped.items()) if c != 0)


@dataclass(frozen=True)
class RadicalSum:
    """The nonnegative real ``sum(coeff * radicand ** (1/degree))``.

    Instances built through the public constructors are normalized: each
    radicand is a v-th-power-free positive integer, radicands are distinct
    and sorted, and coefficients are positive.  Two normalized sums of the
    same degree are equal as reals iff they are equal as objects.
    """

    degree: int
    terms: tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.degree, int) or self.degree < 1:
            raise ValueError(f"degree must be a positive integer, got {self.degree!r}")
        terms = tuple((as_fraction(c), as_fraction(r)) for c, r in self.terms)
        for c, r in terms:
            if c < 0 or r < 0:
                raise ValueError("radical sums need nonnegative coefficients and radicands")
        object.__setattr__(self, "terms", _normalize_terms(self.degree, terms))

    @classmethod
    def rational(cls, x: RationalLike, degree: int = 1) -> RadicalSum:
        return cls(degree, ((as_fraction(x), Fraction(1)),))

    @classmethod
    def root(cls, radicand: RationalLike, degree: int, coeff: RationalLike = 1) -> RadicalSum:
        """``coeff * radicand ** (1/degree)``."""
        return cls(degree, ((as_fraction(coeff), as_fraction(radicand)),))

    @classmethod
    def zero(cls, degree: int = 1) -> RadicalSum:
        return cls(degree, ())

    # -- structure ------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_rational(self) -> bool:
        return all(r == 1 for _, r in self.terms)

    def is_monomial(self) -> bool:
        return len(self.terms) <= 1

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is irrational")
        return sum((c for c, _ in self.terms), Fraction(0))

    def lift(self, degree: int) -> RadicalSum:
        """Same value written with ``degree``-th roots (a multiple of ours)."""
        if degree % self.degree:
            raise ValueError(f"cannot lift degree {self.degree} to {degree}")
        k = degree // self.degree
        if k == 1:
            return self
        return RadicalSum(degree, tuple((c, r ** k) for c, r in self.terms))

    def reduced(self) -> RadicalSum:
        """Rewrite with the smallest degree that still expresses the value."""
        best = self.degree
        for d in sorted(_divisors(self.degree)):
            k = self.degree // d
            if all(_is_kth_power(r, k) for _, r in self.terms):
                best = d
                break
        if best == self.degree:
            return self
        k = self.degree // best
        return RadicalSum(best, tuple((c, Fraction(iroot(int(r), k))) for c, r in self.terms))

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: RadicalSum | RationalLike) -> RadicalSum:
        other = _as_radical(other)
        d = math.lcm(self.degree, other.degree)
        return RadicalSum(d, self.lift(d).terms + other.lift(d).terms)

    __radd__ = __add__

    def __mul__(self, other: RadicalSum | RationalLike) -> RadicalSum:
        other = _as_radical(other)
        d = math.lcm(self.degree, other.degree)
        a, b = self.lift(d), other.lift(d)
        return RadicalSum(d, tuple((c1 * c2, r1 * r2) for c1, r1 in a.terms for c2, r2 in b.terms))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> RadicalSum:
        if not isinstance(k, int) or k < 0:
            raise ValueError("RadicalSum supports nonnegative integer powers only")
        result = RadicalSum.rational(1, self.degree)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- numerics ----------------------------------------------------------

    def enclose(self, bits: int) -> tuple[Fraction, Fraction]:
        lo = hi = Fraction(0)
        for c, r in self.terms:
            a, b = _root_bounds(r, self.degree, bits)
            lo += c * a
            hi += c * b
        return lo, hi

    def approx(self, digits: int = 20) -> str:
        return _approx(self, digits)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for c, r in self.terms:
            if r == 1:
                parts.append(format_rational(c))
                continue
            rad = f"{format_rational(r)}^(1/{self.degree})"
            parts.append(rad if c == 1 else f"{format_rational(c)}*{rad}")
        return " + ".join(parts)


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def _is_kth_power(r: Fraction, k: int) -> bool:
    return r.denominator == 1 and iroot(r.numerator, k) ** k == r.numerator


def _as_radical(x: RadicalSum | RationalLike) -> RadicalSum:
    if isinstance(x, RadicalSum):
        return x
    return RadicalSum.rational(as_fraction(x))


@dataclass(frozen=True)
class RadicalPower:
    """The real ``base ** exponent`` for a positive radical sum ``base``.

    Only produced by :func:`power` when the value is not itself a radical
    sum, e.g. ``((1-t)*a^(2/3) + t*b^(2/3)) ** (3/2)``.
    """

    base: RadicalSum
    exponent: Fraction

    def enclose(self, bits: int) -> tuple[Fraction, Fraction | None]:
        lo, hi = self.base.enclose(bits)
        a, b = self.exponent.numerator, self.exponent.denominator
        if a < 0:
            if lo == 0:
                return Fraction(0), None
            lo, hi = 1 / hi, 1 / lo
            a = -a
        rlo, _ = _root_bounds(lo ** a, b, bits)
        _, rhi = _root_bounds(hi ** a, b, bits)
        return rlo, rhi

    @property
    def degree(self) -> int:
        return self.base.degree

    def approx(self, digits: int = 20) -> str:
        return _approx(self, digits)

    def __str__(self) -> str:
        return f"({self.base})^({format_rational(self.exponent)})"


ExactValue = Union[RadicalSum, RadicalPower]


def power(base: RadicalSum, exponent: RationalLike) -> ExactValue:
    """``base ** exponent`` in the simplest available exact form."""
    e = as_fraction(exponent)
    if base.is_zero():
        if e <= 0:
            raise ZeroDivisionError("zero to a nonpositive power")
        return RadicalSum.zero(base.degree)
    if e == 0:
        return RadicalSum.rational(1)
    a, b = e.numerator, e.denominator
    if base.is_monomial():
        (c, r), = base.terms
        # (c * r^(1/v))^(a/b) = (c^(a v) * r^a)^(1/(v b))
        if a < 0:
            c, r, a = 1 / c, 1 / r, -a
        return RadicalSum.root(c ** (a * base.degree) * r ** a, base.degree * b)
    if b == 1 and a > 0:
        return base ** a
    return RadicalPower(base, e)


def exact(x: ExactValue | RationalLike) -> ExactValue:
    if isinstance(x, (RadicalSum, RadicalPower)):
        return x
    return RadicalSum.rational(as_fraction(x))


def _approx(x: ExactValue, digits: int) -> str:
    from decimal import Decimal, localcontext

    bits = 64
    while True:
        lo, hi = x.enclose(bits)
        if hi is not None and (hi - lo) * 10 ** (digits + 2) <= max(lo, Fraction(1, 10 ** digits)):
            break
        bits *= 2
    with localcontext() as ctx:
        ctx.prec = digits
        mid = (lo + hi) / 2
        d = +(Decimal(mid.numerator) / Decimal(mid.denominator))
    # fixed notation with exactly ``digits`` significant digits, e.g. 3.0000000000000000000
    places = digits - 1 - (d.adjusted() if d else 0)
    return format(d, f".{places}f") if places >= 0 else format(d, f".{digits - 1}e")


# ---------------------------------------------------------------------------
# Ordering
# ---------------------------------------------------------------------------

class Relation(enum.Enum):
    LESS = "Less"
    EQUAL = "Equal"
    GREATER = "Greater"


@dataclass(frozen=True)
class OrderingCertificate:
    """Why ``lhs`` relates to ``rhs`` as ``relation``.

    ``proof == "algebraic"``: normal forms were compared (identical for
    Equal).  ``proof == "interval"``: the dyadic enclosures at ``bits``
    fractional bits are disjoint.
    """

    relation: Relation
    proof: str
    bits: int | None = None
    lhs_enclosure: tuple[Fraction, Fraction] | None = None
    rhs_enclosure: tuple[Fraction, Fraction] | None = None


def _as_power(x: ExactValue) -> tuple[RadicalSum, Fraction]:
    if isinstance(x, RadicalPower):
        return x.base, x.exponent
    return x, Fraction(1)


def _int_power(base: RadicalSum, k: int) -> tuple[RadicalSum, RadicalSum]:
    """``base ** k`` as a fraction ``num / den`` of radical sums."""
    if k >= 0:
        return base ** k, RadicalSum.rational(1)
    return RadicalSum.rational(1), base ** (-k)


def algebraically_equal(x: ExactValue, y: ExactValue) -> bool:
    """Decide ``x == y`` exactly.

    Raising both sides to a common integer power turns each into a ratio of
    radical sums; cross-multiplying leaves two radical sums whose normal
    forms agree iff the values agree (roots of distinct power-free integers
    are linearly independent over Q).
    """
    bx, ex = _as_power(x)
    by, ey = _as_power(y)
    if ex == ey == 1:
        d = math.lcm(bx.degree, by.degree)
        return bx.lift(d) == by.lift(d)
    n = math.lcm(ex.denominator, ey.denominator)
    xn, xd = _int_power(bx, int(ex * n))
    yn, yd = _int_power(by, int(ey * n))
    left, right = xn * yd, yn * xd
    d = math.lcm(left.degree, right.degree)
    return left.lift(d) == right.lift(d)


def compare(x: ExactValue | RationalLike, y: ExactValue | RationalLike,
            start_bits: int = 64) -> OrderingCertificate:
    """Certified ordering of two exact nonnegative reals."""
    x, y = exact(x), exact(y)
    if algebraically_equal(x, y):
        return OrderingCertificate(Relation.EQUAL, "algebraic")
    bits = start_bits
    while True:
        xl, xh = x.enclose(bits)
        yl, yh = y.enclose(bits)
        if xh is not None and xh < yl:
            return OrderingCertificate(Relation.LESS, "interval", bits, (xl, xh), (yl, yh))
        if yh is not None and yh < xl:
            return OrderingCertificate(Relation.GREATER, "interval", bits, (xl, xh), (yl, yh))
        bits *= 2


def dyadic_ceil(x: ExactValue | RationalLike, bits: int) -> Fraction:
    """Smallest multiple of ``2**-bits`` that is ``>= x``."""
    x = exact(x)
    scale = 1 << bits
    lo, _ = x.enclose(bits + 8)
    n = rat_ceil(lo * scale)
    while compare(Fraction(n, scale), x).relation is Relation.LESS:
        n += 1
    while n > 0 and compare(Fraction(n - 1, scale), x).relation is not Relation.LESS:
        n -= 1
    return Fraction(n, scale)


def compare_radicals(lhs: RadicalSum, rhs: RadicalSum) -> OrderingCertificate:
    """Ordering of two radical sums; degrees are lifted to a common multiple."""
    return compare(lhs, rhs)


# ---------------------------------------------------------------------------
# p-means
# ---------------------------------------------------------------------------

def _check_weight(lam: Fraction) -> Fraction:
    lam = as_fraction(lam)
    if not 0 < lam < 1:
        raise ValueError(f"weight must lie in (0, 1), got {format_rational(lam)}")
    return lam


def p_mean(a: RationalLike, b: RationalLike, lam: RationalLike,
           p: ExtendedExponent) -> ExactValue:
    """``M_p(a, b, lam)``, with the value 0 whenever ``a * b == 0``."""
    a, b = as_fraction(a), as_fraction(b)
    lam = _check_weight(lam)
    if a < 0 or b < 0:
        raise ValueError("p-means are defined for nonnegative arguments")
    if a == 0 or b == 0:
        return RadicalSum.zero()
    if p == INF:
        return RadicalSum.rational(max(a, b))
    if p == -INF:
        return RadicalSum.rational(min(a, b))
    p = as_fraction(p)
    if p == 0:
        s, t = lam.numerator, lam.denominator
        return RadicalSum.root(a ** (t - s) * b ** s, t)
    u, v = p.numerator, p.denominator
    # a^p = (a^u)^(1/v); negative u goes through 1/a
    x, y = (a ** u, b ** u) if u > 0 else ((1 / a) ** -u, (1 / b) ** -u)
    s = RadicalSum(v, ((1 - lam, x), (lam, y)))
    return power(s, Fraction(v, u))


def conj_exponent(p: ExtendedExponent, n: int) -> ExtendedExponent:
    """The conclusion exponent ``p / (n p + 1)`` paired with hypothesis exponent ``p``."""
    if n < 1:
        raise ValueError("dimension must be positive")
    if p == INF:
        return Fraction(1, n)
    if p == -INF or as_fraction(p) < Fraction(-1, n):
        raise ValueError(f"exponent must be >= -1/{n}, got {format_exponent(p)}")
    p = as_fraction(p)
    if p == Fraction(-1, n):
        return -INF
    return p / (n * p + 1)


# ---------------------------------------------------------------------------
# JSON helpers
# ---------------------------------------------------------------------------

def value_to_json(x: ExactValue) -> dict:
    base, e = _as_power(x)
    out = {
        "degree": base.degree,
        "terms": [[format_rational(c), format_rational(r)] for c, r in base.terms],
    }
    if e != 1:
        out["exponent"] = format_rational(e)
    return out


def value_from_json(obj: dict) -> ExactValue:
    base = RadicalSum(int(obj["degree"]),
                      tuple((parse_rational(c), parse_rational(r)) for c, r in obj["terms"]))
    if "exponent" in obj:
        return power(base, parse_rational(obj["exponent"]))
    return base
