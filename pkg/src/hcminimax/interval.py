"""Interval arithmetic on binary64 endpoints with outward rounding.

Rounding is directed without touching the FPU mode: every endpoint is
computed in round-to-nearest and then moved one ulp outward unless an
error-free transformation shows the result is already exact (or already on
the safe side).  Elementary functions widen by at most two ulps.

The module also hosts the two generic verification tools built on top of the
arithmetic: an interval Newton root encloser and an adaptive positivity
verifier over a bounded box.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Callable, Iterator, Optional, Sequence, Union

from .exceptions import (
    DivisorContainsZero,
    EmptyIntersection,
    NegativeSqrtDomain,
)

__all__ = [
    "Interval",
    "PositivityCertificate",
    "as_interval",
    "iv_add",
    "iv_sub",
    "iv_mul",
    "iv_div",
    "iv_exp",
    "iv_sqrt",
    "iv_cbrt",
    "iv_powi",
    "iv_hull",
    "iv_intersect",
    "interval_newton",
    "newton_iterates",
    "verify_positive_on",
    "LN2",
    "PI",
]

_INF = math.inf
_MAX = 1.7976931348623157e308
# Veltkamp splitting and Dekker's product are exact below this magnitude.
_SAFE_HI = 2.0**995
_SAFE_LO = 2.0**-969
_SPLITTER = 134217729.0  # 2**27 + 1


def _down(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a: float) -> tuple[float, float]:
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _add_rd(a: float, b: float) -> float:
    s = a + b
    if math.isinf(s):
        if math.isinf(a) or math.isinf(b):
            return s
        return _MAX if s > 0 else s
    _, err = _two_sum(a, b)
    return _down(s) if err < 0 else s


def _add_ru(a: float, b: float) -> float:
    s = a + b
    if math.isinf(s):
        if math.isinf(a) or math.isinf(b):
            return s
        return -_MAX if s < 0 else s
    _, err = _two_sum(a, b)
    return _up(s) if err > 0 else s


def _mul_pair(a: float, b: float) -> tuple[float, float]:
    """Return (round-down, round-up) of the product a*b."""
    if a == 0.0 or b == 0.0:
        # 0 * inf is taken as 0: the true factors are finite reals.
        return 0.0, 0.0
    p = a * b
    if math.isinf(p):
        if math.isinf(a) or math.isinf(b):
            return p, p
        return (_MAX, p) if p > 0 else (p, -_MAX)
    ap = abs(p)
    if abs(a) < _SAFE_HI and abs(b) < _SAFE_HI and ap > _SAFE_LO:
        _, err = _two_prod(a, b)
        if err == 0.0:
            return p, p
        return (p, _up(p)) if err > 0 else (_down(p), p)
    # the sign of a nonzero product is known even when it underflows
    if (a > 0) == (b > 0):
        return max(_down(p), 0.0), _up(p)
    return _down(p), min(_up(p), 0.0)


def _div_pair(a: float, b: float) -> tuple[float, float]:
    if a == 0.0:
        return 0.0, 0.0
    if math.isinf(b):
        if math.isinf(a):
            return -_INF, _INF
        return (-0.0, 0.0)
    q = a / b
    if math.isinf(q):
        if math.isinf(a):
            return q, q
        return (_MAX, q) if q > 0 else (q, -_MAX)
    if q != 0.0 and abs(q) < _SAFE_HI and abs(b) < _SAFE_HI and abs(a) > _SAFE_LO:
        p, err = _two_prod(q, b)
        if p == a and err == 0.0:
            return q, q
    return _down(q), _up(q)


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]`` of reals with binary64 endpoints."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        lo = float(self.lo)
        hi = float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if lo > hi:
            raise ValueError(f"empty interval [{lo!r}, {hi!r}]")
        if lo == _INF or hi == -_INF:
            raise ValueError("interval must contain a real number")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(x, x)

    @classmethod
    def from_fraction(cls, x: Fraction) -> "Interval":
        """Tightest binary64 enclosure of an exact rational."""
        x = Fraction(x)
        f = float(x)
        if math.isinf(f):
            return cls(_MAX, _INF) if f > 0 else cls(-_INF, -_MAX)
        exact = Fraction(f)
        if exact == x:
            return cls(f, f)
        if exact < x:
            return cls(f, _up(f))
        return cls(_down(f), f)

    # -- basic properties -------------------------------------------------

    @property
    def mid(self) -> float:
        if math.isinf(self.lo) or math.isinf(self.hi):
            if math.isinf(self.lo) and math.isinf(self.hi):
                return 0.0
            return self.hi if math.isinf(self.lo) else self.lo
        m = 0.5 * self.lo + 0.5 * self.hi
        return min(max(m, self.lo), self.hi)

    @property
    def width(self) -> float:
        return _add_ru(self.hi, -self.lo)

    @property
    def mag(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def contains(self, x: Union[Real, "Interval"]) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        # float/Fraction comparisons are exact in Python
        return self.lo <= x <= self.hi

    __contains__ = contains

    def is_positive(self) -> bool:
        return self.lo > 0.0

    def is_nonnegative(self) -> bool:
        return self.lo >= 0.0

    def bisect(self) -> tuple["Interval", "Interval"]:
        m = self.mid
        return Interval(self.lo, m), Interval(m, self.hi)

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        return iv_add(self, other)

    def __radd__(self, other):
        return iv_add(as_interval(other), self)

    def __sub__(self, other):
        return iv_sub(self, other)

    def __rsub__(self, other):
        return iv_sub(as_interval(other), self)

    def __mul__(self, other):
        return iv_mul(self, other)

    def __rmul__(self, other):
        return iv_mul(as_interval(other), self)

    def __truediv__(self, other):
        return iv_div(self, other)

    def __rtruediv__(self, other):
        return iv_div(as_interval(other), self)

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __pos__(self) -> "Interval":
        return self

    def __abs__(self) -> "Interval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Interval(0.0, self.mag)

    def __pow__(self, n: int) -> "Interval":
        return iv_powi(self, n)

    def exp(self) -> "Interval":
        return iv_exp(self)

    def sqrt(self) -> "Interval":
        return iv_sqrt(self)

    def cbrt(self) -> "Interval":
        return iv_cbrt(self)

    def __repr__(self) -> str:
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __str__(self) -> str:
        return f"[{self.lo:.17g}, {self.hi:.17g}]"


Number = Union[Interval, Real, Fraction, str]


def as_interval(x: Number) -> Interval:
    """Coerce ``x`` to an enclosing :class:`Interval`.

    Floats are taken as exact binary values; ints, Fractions and decimal
    strings are enclosed as exact rationals.
    """
    if isinstance(x, Interval):
        return x
    if isinstance(x, float):
        return Interval(x, x)
    if isinstance(x, bool):
        raise TypeError("bool is not a number here")
    if isinstance(x, (int, Fraction, str)):
        return Interval.from_fraction(Fraction(x))
    if isinstance(x, Real):
        return Interval(float(x), float(x))
    raise TypeError(f"cannot convert {type(x).__name__} to Interval")


def iv_add(x: Number, y: Number) -> Interval:
    x, y = as_interval(x), as_interval(y)
    return Interval(_add_rd(x.lo, y.lo), _add_ru(x.hi, y.hi))


def iv_sub(x: Number, y: Number) -> Interval:
    x, y = as_interval(x), as_interval(y)
    return Interval(_add_rd(x.lo, -y.hi), _add_ru(x.hi, -y.lo))


def iv_mul(x: Number, y: Number) -> Interval:
    x, y = as_interval(x), as_interval(y)
    if x.lo >= 0 and y.lo >= 0:
        lo, _ = _mul_pair(x.lo, y.lo)
        _, hi = _mul_pair(x.hi, y.hi)
        return Interval(lo, hi)
    pairs = [
        _mul_pair(x.lo, y.lo),
        _mul_pair(x.lo, y.hi),
        _mul_pair(x.hi, y.lo),
        _mul_pair(x.hi, y.hi),
    ]
    return Interval(min(p[0] for p in pairs), max(p[1] for p in pairs))


def iv_div(x: Number, y: Number) -> Interval:
    x, y = as_interval(x), as_interval(y)
    if y.lo <= 0.0 <= y.hi:
        raise DivisorContainsZero(f"divisor {y} contains zero")
    pairs = [
        _div_pair(x.lo, y.lo),
        _div_pair(x.lo, y.hi),
        _div_pair(x.hi, y.lo),
        _div_pair(x.hi, y.hi),
    ]
    return Interval(min(p[0] for p in pairs), max(p[1] for p in pairs))


def _exp_down(x: float) -> float:
    if x == 0.0:
        return 1.0
    try:
        e = math.exp(x)
    except OverflowError:
        return _MAX
    if math.isinf(e):
        return _MAX
    return max(_down(_down(e)), 0.0)


def _exp_up(x: float) -> float:
    if x == 0.0:
        return 1.0
    try:
        e = math.exp(x)
    except OverflowError:
        return _INF
    if e == 0.0:
        return 5e-324
    return _up(_up(e))


def iv_exp(x: Number) -> Interval:
    x = as_interval(x)
    return Interval(_exp_down(x.lo), _exp_up(x.hi))


def _sqrt_pair(a: float) -> tuple[float, float]:
    if a == 0.0:
        return 0.0, 0.0
    if math.isinf(a):
        return _MAX, _INF
    s = math.sqrt(a)
    if _SAFE_LO < a < _SAFE_HI:
        p, err = _two_prod(s, s)
        diff = (p - a) + err
        if diff == 0.0:
            return s, s
        return (_down(s), s) if diff > 0 else (s, _up(s))
    return max(_down(s), 0.0), _up(s)


def iv_sqrt(x: Number) -> Interval:
    x = as_interval(x)
    if x.lo < 0.0:
        raise NegativeSqrtDomain(f"sqrt of {x} with negative lower endpoint")
    return Interval(_sqrt_pair(x.lo)[0], _sqrt_pair(x.hi)[1])


def _cbrt_pair(a: float) -> tuple[float, float]:
    """Directed cube-root bounds of a nonnegative float, checked exactly."""
    if a == 0.0:
        return 0.0, 0.0
    if math.isinf(a):
        return 0.0, _INF
    c = a ** (1.0 / 3.0)
    # one Newton polish in floating point; the exact checks below decide
    c = c - (c * c * c - a) / (3.0 * c * c)
    target = Fraction(a)
    lo = c
    while Fraction(lo) ** 3 > target:
        lo = _down(lo)
    hi = lo
    while Fraction(hi) ** 3 < target:
        hi = _up(hi)
    return lo, hi


def iv_cbrt(x: Number) -> Interval:
    x = as_interval(x)

    def lower(v: float) -> float:
        return _cbrt_pair(v)[0] if v >= 0 else -_cbrt_pair(-v)[1]

    def upper(v: float) -> float:
        return _cbrt_pair(v)[1] if v >= 0 else -_cbrt_pair(-v)[0]

    return Interval(lower(x.lo), upper(x.hi))


def _pow_nonneg(a: float, n: int) -> Interval:
    result = Interval(1.0, 1.0)
    base = Interval(a, a)
    while n:
        if n & 1:
            result = iv_mul(result, base)
        n >>= 1
        if n:
            base = iv_mul(base, base)
    return result


def iv_powi(x: Number, n: int) -> Interval:
    """Integer power with the exact image for even powers of mixed-sign x."""
    x = as_interval(x)
    if not isinstance(n, int) or isinstance(n, bool):
        raise TypeError("exponent must be an int")
    if n == 0:
        return Interval(1.0, 1.0)
    if n < 0:
        return iv_div(1.0, iv_powi(x, -n))
    if n % 2 == 1:
        lo = _pow_nonneg(x.lo, n).lo if x.lo >= 0 else -_pow_nonneg(-x.lo, n).hi
        hi = _pow_nonneg(x.hi, n).hi if x.hi >= 0 else -_pow_nonneg(-x.hi, n).lo
        return Interval(lo, hi)
    if x.lo >= 0:
        return Interval(_pow_nonneg(x.lo, n).lo, _pow_nonneg(x.hi, n).hi)
    if x.hi <= 0:
        return Interval(_pow_nonneg(-x.hi, n).lo, _pow_nonneg(-x.lo, n).hi)
    return Interval(0.0, _pow_nonneg(x.mag, n).hi)


def iv_hull(*xs: Interval) -> Interval:
    return Interval(min(x.lo for x in xs), max(x.hi for x in xs))


def iv_intersect(x: Interval, y: Interval) -> Optional[Interval]:
    lo, hi = max(x.lo, y.lo), min(x.hi, y.hi)
    if lo > hi:
        return None
    return Interval(lo, hi)


def iv_ldexp(x: Interval, e: int) -> Interval:
    """Multiply by 2**e; exact except on under/overflow, where it widens."""
    def scale(v: float, down: bool) -> float:
        r = math.ldexp(v, e) if not math.isinf(v) else v
        if v == 0.0 or math.isinf(v):
            return r
        if r == 0.0 or abs(r) < 2.2250738585072014e-308:
            return _down(r) if down else _up(r)
        if math.isinf(r):
            return (_MAX if r > 0 else r) if down else (r if r > 0 else -_MAX)
        return r

    try:
        return Interval(scale(x.lo, True), scale(x.hi, False))
    except OverflowError:
        lo = _MAX if x.lo > 0 else -_INF
        hi = _INF if x.hi > 0 else -_MAX
        return Interval(lo, hi)


LN2 = Interval(0.6931471805599453, _up(0.6931471805599453))
PI = Interval(math.pi, _up(math.pi))


# ---------------------------------------------------------------------------
# interval Newton
# ---------------------------------------------------------------------------

IntervalFunction = Callable[[Interval], Interval]


def newton_iterates(
    f: IntervalFunction,
    df: IntervalFunction,
    bracket: Interval,
    max_iter: int = 100,
) -> Iterator[tuple[int, Interval]]:
    """Yield ``(i, [l, u])`` after each interval Newton update.

    The update is ``[a, b] = m - f(m) / df([l, u])`` followed by
    ``l = max(l, a)``, ``u = min(u, b)``.  When ``df([l, u])`` contains zero
    the Newton quotient is undefined; the step then keeps whichever halves
    ``[l, m]``, ``[m, u]`` still admit a zero of ``f``.  Iteration stops at
    ``max_iter`` or once the enclosure no longer changes.
    """
    lo, hi = bracket.lo, bracket.hi
    for i in range(1, max_iter + 1):
        box = Interval(lo, hi)
        m = box.mid
        slope = df(box)
        if slope.lo <= 0.0 <= slope.hi:
            keep = [h for h in (Interval(lo, m), Interval(m, hi)) if 0.0 in f(h)]
            if not keep:
                raise EmptyIntersection(f"no zero of f in {box}")
            new = iv_hull(*keep)
            a, b = new.lo, new.hi
        else:
            step = iv_sub(Interval(m, m), iv_div(f(Interval(m, m)), slope))
            a, b = step.lo, step.hi
        nlo, nhi = max(lo, a), min(hi, b)
        if nlo > nhi:
            raise EmptyIntersection(f"Newton step left {box} empty")
        changed = (nlo, nhi) != (lo, hi)
        lo, hi = nlo, nhi
        yield i, Interval(lo, hi)
        if not changed:
            return


def interval_newton(
    f: IntervalFunction,
    df: IntervalFunction,
    bracket: Interval,
    max_iter: int = 100,
) -> Interval:
    result = bracket
    for _, result in newton_iterates(f, df, bracket, max_iter):
        pass
    return result


# ---------------------------------------------------------------------------
# positivity verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PositivityCertificate:
    """Outcome of an adaptive positivity check of ``f`` over ``domain``.

    ``splits`` is the deepest bisection level reached and ``boxes`` the
    number of enclosures evaluated.  ``leaves`` lists the accepted sub-boxes
    in the deterministic order they were discharged, so the certificate can
    be re-checked without repeating the search.  Composite certificates (a
    union of regions) carry their pieces in ``parts``.
    """

    domain: Interval
    verified: bool
    splits: int
    min_enclosure: Interval
    boxes: int = 0
    leaves: tuple[tuple[float, float], ...] = ()
    parts: tuple["PositivityCertificate", ...] = ()
    method: str = "bisection"

    def __post_init__(self) -> None:
        if self.verified and not self.min_enclosure.lo > 0:
            raise ValueError("verified certificate needs a positive lower bound")

    def recheck(self, f: IntervalFunction, df: Optional[IntervalFunction] = None) -> bool:
        """Re-verify from the stored leaves; pass the same ``df`` the search
        used, since leaves accepted through the mean-value form may fail the
        plain enclosure."""
        if self.parts:
            return all(p.recheck(f, df) for p in self.parts)
        if self.method == "monotone_tail":
            if df is None:
                return self.verified
            x = Interval(self.domain.lo, self.domain.lo)
            return f(x).lo > 0 and df(x).lo > 0
        if not self.verified:
            return False
        covered = self.domain.lo
        for lo, hi in sorted(self.leaves):
            if lo > covered or not _enclose(f, df, Interval(lo, hi)).lo > 0:
                return False
            covered = max(covered, hi)
        return covered >= self.domain.hi

    @classmethod
    def union(cls, parts: Sequence["PositivityCertificate"]) -> "PositivityCertificate":
        worst = min(parts, key=lambda c: c.min_enclosure.lo)
        return cls(
            domain=iv_hull(*(p.domain for p in parts)),
            verified=all(p.verified for p in parts),
            splits=max(p.splits for p in parts),
            min_enclosure=worst.min_enclosure,
            boxes=sum(p.boxes for p in parts),
            parts=tuple(parts),
            method="union",
        )


def _enclose(f, df, box: Interval) -> Interval:
    value = f(box)
    if df is None:
        return value
    m = box.mid
    centered = f(Interval(m, m)) + df(box) * (box - m)
    return iv_intersect(value, centered) or value


def verify_positive_on(
    f: IntervalFunction,
    domain: Interval,
    max_depth: int = 60,
    df: Optional[IntervalFunction] = None,
    max_boxes: int = 2_000_000,
) -> PositivityCertificate:
    """Try to prove ``f > 0`` on ``domain`` by adaptive bisection.

    Sub-boxes are processed widest-enclosure first (ties broken by position),
    which makes the search and its certificate deterministic.  When ``df`` is
    given, the mean-value form ``f(m) + df(X)(X - m)`` is intersected with
    the plain enclosure.  A ``verified=False`` result is inconclusive unless
    ``min_enclosure`` is a point value with ``hi <= 0``.
    """
    if math.isinf(domain.lo) or math.isinf(domain.hi):
        raise ValueError("verify_positive_on needs a bounded domain")

    counter = 0
    boxes = 0
    deepest = 0
    worst: Optional[Interval] = None
    leaves: list[tuple[float, float]] = []

    def push(heap, box, depth):
        nonlocal counter, boxes
        enc = _enclose(f, df, box)
        boxes += 1
        counter += 1
        heapq.heappush(heap, (-(enc.hi - enc.lo), box.lo, counter, depth, box, enc))

    heap: list = []
    push(heap, domain, 0)
    while heap:
        _, _, _, depth, box, enc = heapq.heappop(heap)
        deepest = max(deepest, depth)
        if enc.lo > 0:
            leaves.append((box.lo, box.hi))
            if worst is None or enc.lo < worst.lo:
                worst = enc
            continue
        probe = f(Interval(box.mid, box.mid))
        if probe.hi <= 0:
            return PositivityCertificate(domain, False, deepest, probe, boxes)
        left, right = box.bisect()
        if depth >= max_depth or boxes >= max_boxes or left.lo == left.hi or right.lo == right.hi:
            return PositivityCertificate(domain, False, deepest, enc, boxes)
        push(heap, left, depth + 1)
        push(heap, right, depth + 1)
    return PositivityCertificate(domain, True, deepest, worst, boxes, tuple(leaves))
