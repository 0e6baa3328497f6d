"""Rigorous enclosures of Kummer's function and the truncated bound polynomials.

``M(b, c, w) = 1 + sum_{i>=1} b(b+1)...(b+i-1) / (c(c+1)...(c+i-1)) * w**i / i!``

All series here are summed in interval arithmetic.  The truncation tail is
enclosed by a geometric bound once the term ratio is at most 1/2, and sums
are kept in a scaled form ``mantissa * 2**exponent`` so arguments far past
the binary64 overflow of ``exp(w)`` are still usable in ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .exceptions import DeltaOutOfRange, TolExceeded
from .interval import Interval, as_interval, iv_exp, iv_hull, iv_intersect, iv_ldexp

__all__ = [
    "KummerParams",
    "IntervalPolynomial",
    "BoundPolynomial",
    "WindowPolynomial",
    "kummer_scaled",
    "kummer_enclosure",
    "ratio_enclosure",
    "build_fN",
    "eval_bound_poly",
    "g_tail_enclosure",
    "window_numerator_poly",
    "window_denominator_poly",
    "exact",
]

TERM_CAP = 10_000
DEFAULT_TOL = 1e-15
_RESCALE_AT = 2.0**600
_RESCALE_BITS = 600

Real = Union[int, float, Fraction, str]
Param = Union[Real, Interval]


def exact(x: Real) -> Fraction:
    """Exact rational value of a number; floats keep their binary value."""
    if isinstance(x, Interval):
        raise TypeError("an Interval has no exact value")
    return Fraction(x)


def _param(x: Param, shift: int = 0) -> Interval:
    if isinstance(x, Interval):
        return x + shift if shift else x
    return Interval.from_fraction(exact(x) + shift)


def _lower(x: Param) -> float:
    return x.lo if isinstance(x, Interval) else exact(x)


def _upper(x: Param) -> float:
    return x.hi if isinstance(x, Interval) else exact(x)


@dataclass(frozen=True)
class KummerParams:
    b: Param
    c: Param
    w: Param

    def __post_init__(self) -> None:
        if not _lower(self.c) > 0:
            raise ValueError("M(b, c, w) needs c > 0")
        if not _lower(self.w) >= 0:
            raise ValueError("M(b, c, w) is only enclosed for w >= 0")
        if not _lower(self.b) > -1:
            raise ValueError("M(b, c, w) is only enclosed for b > -1")


def kummer_scaled(
    b: Param,
    c: Param,
    w: Param,
    tol: float = DEFAULT_TOL,
    max_terms: int = TERM_CAP,
) -> tuple[Interval, int]:
    """Enclose ``M(b, c, w)`` as ``(mantissa, e)`` with value ``mantissa * 2**e``.

    The tail after the last summed term is bounded by ``|t_n| rho / (1 - rho)``
    where ``rho`` dominates every later term ratio; summation stops once
    ``rho <= 1/2`` and the bound is below ``tol`` times the running absolute
    sum.
    """
    KummerParams(b, c, w)
    bi, ci, wi = _param(b), _param(c), _param(w)
    total = Interval(1.0, 1.0)
    term = Interval(1.0, 1.0)
    abs_sum = 1.0
    scale = 0
    nonneg = bi.lo >= 0
    for k in range(max_terms):
        term = term * ((bi + k) * wi / ((ci + k) * (k + 1)))
        total = total + term
        abs_sum += term.mag
        if term.mag > _RESCALE_AT:
            total = iv_ldexp(total, -_RESCALE_BITS)
            term = iv_ldexp(term, -_RESCALE_BITS)
            abs_sum = math.ldexp(abs_sum, -_RESCALE_BITS)
            scale += _RESCALE_BITS
        n = k + 1
        if (bi + n).lo <= 0 or (ci + n).lo <= 0:
            continue
        growth = max(1.0, ((bi + n) / (ci + n)).hi)
        rho = (Interval(wi.hi, wi.hi) / (n + 1) * growth).hi
        if rho > 0.5:
            continue
        tail = (Interval(term.mag, term.mag) * rho / (1.0 - Interval(rho, rho))).hi
        if tail <= tol * max(abs_sum, math.ldexp(1.0, -scale)):
            bound = Interval(0.0, tail) if nonneg else Interval(-tail, tail)
            return total + bound, scale
    raise TolExceeded(
        f"M({b}, {c}, {w}): tail above {tol} after {max_terms} terms"
    )


def kummer_enclosure(
    b: Param, c: Param, w: Param, tol: float = DEFAULT_TOL
) -> Interval:
    """Interval containing ``M(b, c, w)`` for ``c > 0``, ``w >= 0``, ``b > -1``."""
    mantissa, scale = kummer_scaled(b, c, w, tol)
    return iv_ldexp(mantissa, scale)


def ratio_enclosure(
    b: Param, c: Param, w: Param, tol: float = DEFAULT_TOL
) -> Interval:
    """Interval containing ``M(b - 1, c, w) / M(b, c, w)`` for ``0 < b < 1 < ...``.

    Requires ``0 < b < 1``, ``c > b`` and ``w >= 0``.  The denominator is
    clipped to ``[1, inf)``, which holds because every term of its series is
    nonnegative.
    """
    if not (_lower(b) > 0 and _upper(b) < 1):
        raise ValueError("ratio_enclosure needs 0 < b < 1")
    if not _lower(c) > _upper(b):
        raise ValueError("ratio_enclosure needs c > b")
    num, e_num = kummer_scaled(_param(b, -1), c, w, tol)
    den, e_den = kummer_scaled(b, c, w, tol)
    floor = math.ldexp(1.0, -e_den)
    den = iv_intersect(den, Interval(floor, math.inf)) or den
    ratio = iv_ldexp(num / den, e_num - e_den)
    return iv_intersect(ratio, Interval(-math.inf, 1.0)) or ratio


# ---------------------------------------------------------------------------
# polynomials with interval coefficients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntervalPolynomial:
    """Polynomial ``sum coeffs[i] * w**i`` with interval coefficients."""

    coeffs: tuple[Interval, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, w: Param) -> Interval:
        w = as_interval(w)
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * w + c
        return acc

    def derivative(self) -> "IntervalPolynomial":
        if self.degree == 0:
            return IntervalPolynomial((Interval(0.0, 0.0),))
        return IntervalPolynomial(
            tuple(c * i for i, c in enumerate(self.coeffs) if i > 0)
        )

    def combine(self, other: "IntervalPolynomial", scale: Param) -> "IntervalPolynomial":
        """Return ``self - scale * other``."""
        s = _param(scale)
        zero = Interval(0.0, 0.0)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (zero,) * (n - len(self.coeffs))
        b = other.coeffs + (zero,) * (n - len(other.coeffs))
        return IntervalPolynomial(tuple(x - s * y for x, y in zip(a, b)))


@dataclass(frozen=True)
class BoundPolynomial(IntervalPolynomial):
    """Truncation ``f_N(w; delta)`` of ``M(b-1, b+q+1, w) + delta M(b, b+q+1, w)``.

    ``exact_coeffs`` holds the rational coefficients the intervals were
    rounded from; ``last_negative`` is the index of the last negative
    coefficient when the signs run negative-then-positive, else ``None``.
    """

    N: int
    delta: Fraction
    b: Fraction
    q: Fraction
    exact_coeffs: tuple[Fraction, ...]
    last_negative: Optional[int]

    @property
    def c(self) -> Fraction:
        return self.b + self.q + 1

    def derivative(self) -> IntervalPolynomial:
        return IntervalPolynomial(
            tuple(
                Interval.from_fraction(a * i)
                for i, a in enumerate(self.exact_coeffs)
                if i > 0
            )
        )


@dataclass(frozen=True)
class WindowPolynomial(IntervalPolynomial):
    """Numerator lower bound or denominator upper bound on a window."""

    kind: str
    p: int
    L: int
    w_upper: Optional[float] = None


def _sign_pattern(coeffs: Sequence[Fraction]) -> Optional[int]:
    """Index of the last negative coefficient if signs (past the constant)
    run ``<=0`` then ``>=0`` with nonzero ends, else ``None``."""
    nz = [(i, a) for i, a in enumerate(coeffs) if i > 0 and a != 0]
    if len(nz) < 2 or nz[0][1] > 0 or nz[-1][1] < 0:
        return None
    signs = [a > 0 for _, a in nz]
    first_pos = signs.index(True)
    if not all(signs[first_pos:]):
        return None
    return nz[first_pos - 1][0]


def build_fN(b: Real, q: Real, N: int, delta: Real) -> BoundPolynomial:
    """Build ``f_N(w; delta)`` with exactly accumulated rational coefficients.

    Coefficient ``i >= 1`` is ``(b - 1 + delta (b + i - 1)) * b(b+1)...(b+i-2)
    / ((b+q+1)...(b+q+i)) / i!`` and the constant is ``1 + delta``.
    """
    b, q, delta = exact(b), exact(q), exact(delta)
    if not 0 < b < 1:
        raise ValueError("build_fN needs 0 < b < 1")
    if not q > 0:
        raise ValueError("build_fN needs q > 0")
    if N < 1:
        raise ValueError("build_fN needs N >= 1")
    lo, hi = (1 - b) / (b + N - 1), (1 - b) / b
    if not lo < delta < hi:
        raise DeltaOutOfRange(
            f"delta={delta} outside ({lo}, {hi}); the dropped tail g_N "
            "would not be nonnegative"
        )
    coeffs = [1 + delta]
    rising = Fraction(1)
    falling = Fraction(1)
    for i in range(1, N + 1):
        falling *= (b + q + i) * i
        if i >= 2:
            rising *= b + i - 2
        coeffs.append((b - 1 + delta * (b + i - 1)) * rising / falling)
    return BoundPolynomial(
        coeffs=tuple(Interval.from_fraction(a) for a in coeffs),
        N=N,
        delta=delta,
        b=b,
        q=q,
        exact_coeffs=tuple(coeffs),
        last_negative=_sign_pattern(coeffs),
    )


def eval_bound_poly(poly: IntervalPolynomial, w: Param) -> Interval:
    """Horner evaluation, highest degree first, for ``w`` inside ``[0, inf)``."""
    w = as_interval(w)
    if w.lo < 0:
        raise ValueError("bound polynomials are evaluated on w >= 0 only")
    return poly(w)


def g_tail_enclosure(
    poly: BoundPolynomial, w: Param, tol: float = DEFAULT_TOL
) -> Interval:
    """Enclose the dropped tail ``g_N(w; delta)`` (nonnegative by construction)."""
    b, q, delta, N = poly.b, poly.q, poly.delta, poly.N
    c = b + q + 1
    wi = as_interval(w)
    if wi.lo < 0:
        raise ValueError("g_N is enclosed for w >= 0 only")
    # term N+1 from scratch in exact rationals, times w**(N+1)
    rising = Fraction(1)
    falling = Fraction(1)
    for i in range(1, N + 2):
        falling *= (c + i - 1) * i
        if i >= 2:
            rising *= b + i - 2
    i = N + 1
    term = Interval.from_fraction((b - 1 + delta * (b + i - 1)) * rising / falling) * wi ** i
    total = term
    abs_sum = max(term.mag, 1.0)
    for k in range(TERM_CAP):
        i = N + 1 + k
        lead = b - 1 + delta * (b + i - 1)
        factor = Interval.from_fraction((lead + delta) / lead * (b + i - 1) / ((c + i) * (i + 1)))
        term = term * factor * wi
        total = total + term
        abs_sum += term.mag
        n = i + 1
        lead_n = b - 1 + delta * (b + n - 1)
        growth = (1 + delta / lead_n) * max(Fraction(1), (b + n - 1) / (c + n))
        rho = (Interval(wi.hi, wi.hi) * Interval.from_fraction(growth / (n + 1))).hi
        if rho > 0.5:
            continue
        tail = (Interval(term.mag, term.mag) * rho / (1.0 - Interval(rho, rho))).hi
        if tail <= tol * abs_sum:
            return total + Interval(0.0, tail)
    raise TolExceeded(f"g_N tail above {tol} after {TERM_CAP} terms")


def _half_ratios(p: int, upto: int, top: Fraction) -> list[Fraction]:
    """``r_i = top(top+1)...(top+i-1) / ((p/2+1)...(p/2+i))`` for i = 0..upto."""
    base = Fraction(p, 2) + 1
    out = [Fraction(1)]
    for i in range(1, upto + 1):
        out.append(out[-1] * (top + i - 1) / (base + i - 1))
    return out


def window_numerator_poly(p: int, L: int) -> WindowPolynomial:
    """Degree-``L`` lower bound of ``-M(-1/2, p/2+1, w)`` valid for all ``w >= 0``.

    Every dropped term of the series is positive, so truncation can only
    lower the value.
    """
    if L <= 1:
        raise ValueError("L must be an integer > 1")
    r = _half_ratios(p, L, Fraction(-1, 2))
    coeffs = [Fraction(-1)] + [-r[i] / math.factorial(i) for i in range(1, L + 1)]
    return WindowPolynomial(
        coeffs=tuple(Interval.from_fraction(a) for a in coeffs),
        kind="numerator",
        p=p,
        L=L,
    )


def window_denominator_poly(p: int, L: int, w_u: Param) -> WindowPolynomial:
    """Degree-``L`` upper bound of ``M(1/2, p/2+1, w)`` valid for ``0 <= w <= w_u``.

    The series coefficients decrease in ``i``, so the tail past ``L`` is at
    most ``K (exp(w) - 1 - sum_{i<=L} w**i/i!)`` with ``K`` the coefficient
    of order ``L + 1``; ``exp(w)`` is then bounded by ``exp(w_u)``.
    """
    if L <= 1:
        raise ValueError("L must be an integer > 1")
    wu = _param(w_u)
    if not wu.lo > 0:
        raise ValueError("w_u must be positive")
    r = _half_ratios(p, L + 1, Fraction(1, 2))
    K = r[L + 1]
    const = 1 + Interval.from_fraction(K) * (iv_exp(Interval(wu.hi, wu.hi)) - 1)
    coeffs = [const] + [
        Interval.from_fraction((r[i] - K) / math.factorial(i)) for i in range(1, L + 1)
    ]
    return WindowPolynomial(
        coeffs=tuple(coeffs), kind="denominator", p=p, L=L, w_upper=wu.hi
    )
