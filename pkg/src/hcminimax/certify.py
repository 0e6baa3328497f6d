"""Minimaxity certification for Bayes estimators under beta-type priors.

The estimator is minimax when ``Delta(w) >= 0`` for every ``w >= 0``.  The
range of ``w`` splits into the set where ``M(b-1, b+q, w) >= 0`` or
``M(b-1, b+q+1, w) >= 0`` (there ``Delta >= p/2 - a - 2``) and the set where
both are negative, on which a lower bound ``-delta`` for
``M(b-1, b+q+1, w) / M(b, b+q+1, w)`` gives
``Delta >= p/2 - a - 2 - (p + 2a + 2) delta``.

The bound ``-delta`` comes either from the closed-form quartic minimum
(``Psi(b, q) >= 0`` gives ``delta = (1-b)/(b+2)``), or from a verified
positivity check of the truncated polynomial ``f_N(w; delta)``.  For the
half-Cauchy prior with ``p = 7`` a window ``[9.6, 12.1]`` additionally uses
``-M(-1/2, p/2+1, w) / M(1/2, p/2+1, w) >= 0.08``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .exceptions import DiscriminantViolation, ShapeHypothesisUnverified
from .hypergeom import (
    BoundPolynomial,
    IntervalPolynomial,
    build_fN,
    exact,
    window_denominator_poly,
    window_numerator_poly,
)
from .interval import (
    Interval,
    PositivityCertificate,
    as_interval,
    iv_cbrt,
    iv_powi,
    iv_sqrt,
    verify_positive_on,
)
from .sure_risk import PriorConfig

__all__ = [
    "Branch",
    "Status",
    "Applicability",
    "PsiInputs",
    "CardanoProblem",
    "Certificate",
    "ConditionCheck",
    "zeta_of",
    "psi_of",
    "big_psi",
    "psi_inputs",
    "cardano_min",
    "check_unique_min_shape",
    "check_theorem2",
    "q3_lower_bound",
    "verify_fN_positive",
    "verify_window_ratio",
    "certify_half_cauchy",
    "certify",
    "certify_params",
]

Real = Union[int, float, Fraction, str]

HALF = Fraction(1, 2)
WINDOW = (9.6, 12.1)
WINDOW_RATIO = Fraction(8, 100)
TAIL_START_P7 = 60.0


class Branch(str, enum.Enum):
    THEOREM2_GENERAL = "THEOREM2_GENERAL"
    CASE_P8_10 = "CASE_P8_10"
    CASE_P7 = "CASE_P7"


class Status(str, enum.Enum):
    MINIMAX_CERTIFIED = "MINIMAX_CERTIFIED"
    NOT_APPLICABLE = "NOT_APPLICABLE"
    INCONCLUSIVE = "INCONCLUSIVE"


class Applicability(str, enum.Enum):
    APPLICABLE = "APPLICABLE"
    NOT_APPLICABLE = "NOT_APPLICABLE"


# ---------------------------------------------------------------------------
# zeta, psi, Psi
# ---------------------------------------------------------------------------


def _zeta_exact(b: Fraction, q: Fraction) -> Fraction:
    return (
        Fraction(2, 9) * b * b / ((b + 1) * (b + 2))
        * (b + q + 3) * (b + q + 4) / (b + q + 2) ** 2
    )


def zeta_of(b: Real, q: Real) -> Interval:
    """Enclosure of ``zeta(b, q)``, which lies in ``(0, 1/9)``."""
    b, q = exact(b), exact(q)
    if not (0 < b < 1 and q > 0):
        raise ValueError("zeta(b, q) needs 0 < b < 1 and q > 0")
    z = _zeta_exact(b, q)
    if not 0 < z < Fraction(1, 9):
        raise ArithmeticError(f"zeta({b}, {q}) = {z} escaped (0, 1/9)")
    return Interval.from_fraction(z)


def psi_of(zeta: Union[Interval, Real]) -> Interval:
    """Enclosure of ``psi(zeta) = (zeta (1+Z))**(1/3) + (zeta (1-Z))**(1/3)``,
    ``Z = sqrt(1 - zeta)``.

    ``zeta (1 - Z)`` is evaluated as ``zeta**2 / (1 + Z)`` to avoid the
    cancellation in ``1 - Z`` for small ``zeta``.
    """
    z = as_interval(zeta)
    if not (z.lo > 0 and z.hi <= 1):
        raise ValueError(f"psi needs zeta inside (0, 1], got {z}")
    big_z = iv_sqrt(1 - z)
    return iv_cbrt(z * (1 + big_z)) + iv_cbrt(iv_powi(z, 2) / (1 + big_z))


def big_psi(b: Real, q: Real) -> Interval:
    """Enclosure of ``Psi(b, q)``; ``Psi >= 0`` certifies the ratio bound
    ``-(1-b)/(b+2)``."""
    b, q = exact(b), exact(q)
    lead = Interval.from_fraction(Fraction(4, 3) * b / (1 - b) * (b + q + 1) / (b + q + 2))
    g = psi_of(zeta_of(b, q))
    return lead - 2 * g - iv_powi(g, 2)


@dataclass(frozen=True)
class PsiInputs:
    b: Fraction
    q: Fraction
    zeta: Interval
    psi_val: Interval
    big_psi: Interval
    Z: Interval


def psi_inputs(b: Real, q: Real) -> PsiInputs:
    b, q = exact(b), exact(q)
    z = zeta_of(b, q)
    return PsiInputs(b, q, z, psi_of(z), big_psi(b, q), iv_sqrt(1 - z))


# ---------------------------------------------------------------------------
# closed-form minimum of F(x) = -x - g2 x^2/2 + g4 x^4/24
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CardanoProblem:
    gamma2: Fraction
    gamma4: Fraction
    zeta: Interval
    x_star: Interval
    F_min: Interval

    def F(self, x) -> Interval:
        x = as_interval(x)
        g2 = Interval.from_fraction(self.gamma2)
        g4 = Interval.from_fraction(self.gamma4 / 24)
        return -x - g2 * iv_powi(x, 2) / 2 + g4 * iv_powi(x, 4)

    def dF(self, x) -> Interval:
        x = as_interval(x)
        g2 = Interval.from_fraction(self.gamma2)
        g4 = Interval.from_fraction(self.gamma4 / 6)
        return -1 - g2 * x + g4 * iv_powi(x, 3)

    def d2F(self, x) -> Interval:
        x = as_interval(x)
        return -Interval.from_fraction(self.gamma2) + Interval.from_fraction(self.gamma4 / 2) * iv_powi(x, 2)


def cardano_min(gamma2: Real, gamma4: Real) -> CardanoProblem:
    """Minimiser and minimum of ``F`` on ``[0, inf)`` by Cardano's formula."""
    g2, g4 = exact(gamma2), exact(gamma4)
    if not (g2 > 0 and g4 > 0):
        raise ValueError("gamma2 and gamma4 must be positive")
    if not 9 * g4 > 8 * g2**3:
        raise DiscriminantViolation(f"9*gamma4 = {9 * g4} <= 8*gamma2^3 = {8 * g2**3}")
    zeta = Interval.from_fraction(8 * g2**3 / (9 * g4))
    g = psi_of(zeta)
    x_star = 3 * g / Interval.from_fraction(2 * g2)
    f_min = -(Interval.from_fraction(Fraction(9, 16) / g2) * (2 * g + iv_powi(g, 2)))
    return CardanoProblem(g2, g4, zeta, x_star, f_min)


# ---------------------------------------------------------------------------
# polynomial shape and positivity
# ---------------------------------------------------------------------------


def _coefficient_signs(poly: IntervalPolynomial) -> Optional[list[int]]:
    if isinstance(poly, BoundPolynomial):
        return [(a > 0) - (a < 0) for a in poly.exact_coeffs]
    signs = []
    for c in poly.coeffs:
        if c.lo > 0:
            signs.append(1)
        elif c.hi < 0:
            signs.append(-1)
        elif c.lo == c.hi == 0:
            signs.append(0)
        else:
            return None
    return signs


def check_unique_min_shape(poly: IntervalPolynomial) -> bool:
    """True when the non-constant coefficients are ``<= 0`` up to some index
    and ``>= 0`` after it, with a negative linear term, a negative last
    negative term and a positive leading term.

    Such a polynomial decreases and then increases on ``(0, inf)``.
    """
    signs = _coefficient_signs(poly)
    if signs is None or len(signs) < 3:
        return False
    rest = signs[1:]
    while rest and rest[-1] == 0:
        rest.pop()
    if len(rest) < 2 or rest[0] != -1 or rest[-1] != 1:
        return False
    seen_positive = False
    for s in rest:
        if s > 0:
            seen_positive = True
        elif s < 0 and seen_positive:
            return False
    return True


def _find_tail_start(poly: IntervalPolynomial, start: float) -> float:
    slope = poly.derivative()
    w = max(start, 1.0)
    for _ in range(64):
        x = Interval(w, w)
        if poly(x).lo > 0 and slope(x).lo > 0:
            return w
        w *= 2.0
    raise ShapeHypothesisUnverified("no tail start with f > 0 and f' > 0 found")


def verify_fN_positive(
    poly: IntervalPolynomial,
    region: Sequence[tuple[float, float]] = ((0.0, math.inf),),
    tail_start: Optional[float] = None,
    max_depth: int = 60,
) -> PositivityCertificate:
    """Certify ``poly > 0`` on a union of intervals (the last may be unbounded).

    Bounded pieces are checked by bisection with mean-value enclosures.  An
    unbounded piece ``[lo, inf)`` is split at ``W``: ``[lo, W]`` by bisection
    and ``[W, inf)`` by ``poly(W) > 0`` and ``poly'(W) > 0``, which suffices
    once the coefficient shape forces a single interior minimum.
    """
    slope = poly.derivative()
    parts = []
    for lo, hi in region:
        if math.isinf(hi):
            if not check_unique_min_shape(poly):
                raise ShapeHypothesisUnverified(
                    "coefficient signs do not force a unique minimum"
                )
            w_tail = tail_start if tail_start is not None else _find_tail_start(poly, lo)
            w_tail = max(w_tail, lo)
            if w_tail > lo:
                parts.append(
                    verify_positive_on(poly, Interval(lo, w_tail), max_depth, df=slope)
                )
            x = Interval(w_tail, w_tail)
            value, rising = poly(x), slope(x)
            ok = value.lo > 0 and rising.lo > 0
            parts.append(
                PositivityCertificate(
                    domain=Interval(w_tail, math.inf),
                    verified=ok,
                    splits=0,
                    min_enclosure=value,
                    boxes=1,
                    method="monotone_tail",
                )
            )
        else:
            parts.append(verify_positive_on(poly, Interval(lo, hi), max_depth, df=slope))
    if len(parts) == 1:
        return parts[0]
    return PositivityCertificate.union(parts)


@dataclass(frozen=True)
class WindowCheck:
    certificate: PositivityCertificate
    ratio_lower: float
    threshold: Fraction
    window: tuple[float, float]


def verify_window_ratio(
    p: int = 7,
    L: int = 20,
    window: tuple[float, float] = WINDOW,
    threshold: Real = WINDOW_RATIO,
    max_depth: int = 60,
) -> WindowCheck:
    """Certify ``-M(-1/2, p/2+1, w) / M(1/2, p/2+1, w) >= threshold`` on ``window``.

    With ``NUM`` a lower bound of the numerator and ``DEN`` an upper bound of
    the (positive) denominator on the window, ``NUM - threshold * DEN > 0``
    implies the ratio bound.
    """
    lo, hi = window
    threshold = exact(threshold)
    num = window_numerator_poly(p, L)
    den = window_denominator_poly(p, L, hi)
    if not all(c.lo > 0 for c in den.coeffs):
        raise ArithmeticError("denominator bound is not positive")
    gap = num.combine(den, threshold)
    cert = verify_positive_on(gap, Interval(lo, hi), max_depth, df=gap.derivative())
    ratio_lower = -math.inf
    if cert.verified:
        # report the ratio on a fine grid; the certificate itself needs no grid
        pieces = 512
        edges = [lo + (hi - lo) * i / pieces for i in range(pieces)] + [hi]
        ratio_lower = min(
            (num(Interval(x0, x1)) / den(Interval(x0, x1))).lo
            for x0, x1 in zip(edges, edges[1:])
        )
    return WindowCheck(cert, ratio_lower, threshold, (lo, hi))


# ---------------------------------------------------------------------------
# sufficient conditions and margins
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConditionCheck:
    status: Applicability
    reason: str
    psi: Optional[Interval] = None

    @property
    def applicable(self) -> bool:
        return self.status is Applicability.APPLICABLE


def check_theorem2(cfg: Union[PriorConfig, int], a: Optional[Real] = None, b: Optional[Real] = None) -> ConditionCheck:
    """Check the general sufficient condition on ``(p, a, b)``.

    Either ``-p/2 < a <= -3/2`` with ``0 < b < 1``, or ``-3/2 < a < p/2 - 2``
    with ``(8a + 12)/(2a + 3p) <= b < 1``; in both cases ``Psi(b, p/2 + a)``
    must be nonnegative.  Accepts a :class:`PriorConfig` or raw ``p, a, b``
    (the latter so that improper choices with ``p/2 + a <= 0`` get a reason
    instead of an exception).
    """
    if isinstance(cfg, PriorConfig):
        p, a, b = cfg.p, cfg.a, cfg.b
    else:
        p, a, b = int(cfg), exact(a), exact(b)
    if p < 3:
        raise ValueError("the sufficient condition assumes p >= 3")
    q = Fraction(p, 2) + a
    if not q > 0:
        return ConditionCheck(Applicability.NOT_APPLICABLE, f"q = p/2 + a = {q} is not positive")
    if not 0 < b < 1:
        return ConditionCheck(Applicability.NOT_APPLICABLE, f"b = {b} outside (0, 1)")
    if a <= Fraction(-3, 2):
        pass
    elif a < Fraction(p, 2) - 2:
        floor = (8 * a + 12) / (2 * a + 3 * p)
        if not b >= floor:
            return ConditionCheck(
                Applicability.NOT_APPLICABLE,
                f"b = {b} below (8a+12)/(2a+3p) = {floor}",
            )
    else:
        return ConditionCheck(
            Applicability.NOT_APPLICABLE,
            f"a = {a} not below p/2 - 2 = {Fraction(p, 2) - 2}",
        )
    psi = big_psi(b, q)
    if not psi.lo >= 0:
        return ConditionCheck(
            Applicability.NOT_APPLICABLE,
            f"Psi(b, q) >= 0 not verified: enclosure {psi}",
            psi,
        )
    return ConditionCheck(Applicability.APPLICABLE, "all conditions hold", psi)


def _q12_exact(cfg: PriorConfig) -> Fraction:
    return Fraction(cfg.p, 2) - cfg.a - 2


def _q3_exact(cfg: PriorConfig, delta: Fraction) -> Fraction:
    return _q12_exact(cfg) - (cfg.p + 2 * cfg.a + 2) * delta


def q3_lower_bound(cfg: PriorConfig, delta: Real) -> Interval:
    """``p/2 - a - 2 - (p + 2a + 2) delta``: lower bound of ``Delta`` where both
    ``M(b-1, .)`` values are negative, given the ratio bound ``-delta``."""
    return Interval.from_fraction(_q3_exact(cfg, exact(delta)))


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    p: int
    a: Fraction
    b: Fraction
    branch: Optional[Branch]
    status: Status
    q12_margin: Optional[Interval] = None
    q3_margin: Optional[Interval] = None
    window: Optional[tuple[float, float]] = None
    window_margin: Optional[Interval] = None
    psi_margin: Optional[Interval] = None
    artifacts: tuple[PositivityCertificate, ...] = ()
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.status is Status.MINIMAX_CERTIFIED:
            bad = [name for name, m, _ in self.margins() if not m.lo >= 0]
            if bad or not all(a.verified for a in self.artifacts):
                raise ValueError(f"certified status with failing margins {bad}")

    def margins(self) -> list[tuple[str, Interval, Optional[tuple[float, float]]]]:
        out = []
        if self.q12_margin is not None:
            out.append(("Q1_Q2", self.q12_margin, None))
        if self.q3_margin is not None:
            name = "Q3_OUTSIDE_WINDOW" if self.window else "Q3"
            out.append((name, self.q3_margin, None))
        if self.window_margin is not None:
            out.append(("Q3_WINDOW", self.window_margin, self.window))
        if self.psi_margin is not None:
            out.append(("PSI", self.psi_margin, None))
        return out

    @property
    def certified(self) -> bool:
        return self.status is Status.MINIMAX_CERTIFIED


def _status(margins: Sequence[Interval], artifacts: Sequence[PositivityCertificate]) -> Status:
    if all(m.lo >= 0 for m in margins) and all(a.verified for a in artifacts):
        return Status.MINIMAX_CERTIFIED
    return Status.INCONCLUSIVE


def _certify_general(cfg: PriorConfig, fallback: Status) -> Certificate:
    check = check_theorem2(cfg)
    if not check.applicable:
        return Certificate(
            cfg.p, cfg.a, cfg.b, None, fallback, psi_margin=check.psi,
            notes=(check.reason,),
        )
    q12 = Interval.from_fraction(_q12_exact(cfg))
    q3 = q3_lower_bound(cfg, (1 - cfg.b) / (cfg.b + 2))
    status = _status([q12, q3, check.psi], [])
    return Certificate(
        cfg.p, cfg.a, cfg.b, Branch.THEOREM2_GENERAL, status,
        q12_margin=q12, q3_margin=q3, psi_margin=check.psi,
        notes=(check.reason,),
    )


def _window_seams() -> tuple[float, float]:
    return math.nextafter(WINDOW[0], -math.inf), math.nextafter(WINDOW[1], math.inf)


def certify_half_cauchy(p: int) -> Certificate:
    """Run the case analysis for the half-Cauchy prior ``a = b = 1/2``."""
    if p < 3:
        raise ValueError("minimaxity certification assumes p >= 3")
    cfg = PriorConfig.half_cauchy(p)
    if p >= 11:
        return _certify_general(cfg, Status.INCONCLUSIVE)
    if p < 7:
        return Certificate(
            p, HALF, HALF, None, Status.INCONCLUSIVE,
            notes=("no sufficient condition is available below p = 7",),
        )
    q12 = Interval.from_fraction(_q12_exact(cfg))
    f8 = build_fN(HALF, cfg.q, 8, Fraction(1, 8))
    global_cert = verify_fN_positive(f8)
    if p >= 8:
        q3 = q3_lower_bound(cfg, Fraction(1, 8))
        return Certificate(
            p, HALF, HALF, Branch.CASE_P8_10, _status([q12, q3], [global_cert]),
            q12_margin=q12, q3_margin=q3, artifacts=(global_cert,),
            notes=("ratio >= -1/8 on [0, inf) via f_8(w; 1/8) > 0",),
        )
    # p == 7: -1/10 away from the window, -1/8 everywhere, window bound 0.08
    w_lo, w_hi = _window_seams()
    f20 = build_fN(HALF, cfg.q, 20, Fraction(1, 10))
    outside = verify_fN_positive(
        f20,
        region=((0.0, math.nextafter(WINDOW[0], math.inf)), (math.nextafter(WINDOW[1], -math.inf), math.inf)),
        tail_start=TAIL_START_P7,
    )
    window = verify_window_ratio(p, 20, (w_lo, w_hi), WINDOW_RATIO)
    q3_out = q3_lower_bound(cfg, Fraction(1, 10))
    win_exact = _q3_exact(cfg, Fraction(1, 8)) + cfg.q * WINDOW_RATIO
    win_margin = Interval.from_fraction(win_exact)
    artifacts = (global_cert, outside, window.certificate)
    return Certificate(
        p, HALF, HALF, Branch.CASE_P7,
        _status([q12, q3_out, win_margin], artifacts),
        q12_margin=q12, q3_margin=q3_out, window=WINDOW, window_margin=win_margin,
        artifacts=artifacts,
        notes=(
            "ratio >= -1/8 on [0, inf) via f_8(w; 1/8) > 0",
            "ratio >= -1/10 off the window via f_20(w; 1/10) > 0",
            f"-M(-1/2,p/2+1,w)/M(1/2,p/2+1,w) >= {float(window.ratio_lower):.6g} on the window",
        ),
    )


def certify(cfg: PriorConfig) -> Certificate:
    """Certify minimaxity for any ``(p, a, b)``; half-Cauchy gets the full case
    analysis, other priors the general sufficient condition."""
    if cfg.p < 3:
        raise ValueError("minimaxity certification assumes p >= 3")
    if cfg.is_half_cauchy:
        return certify_half_cauchy(cfg.p)
    return _certify_general(cfg, Status.NOT_APPLICABLE)


def certify_params(p: int, a: Real = HALF, b: Real = HALF) -> Certificate:
    """:func:`certify` from raw parameters; ``p/2 + a <= 0`` yields
    ``NOT_APPLICABLE`` rather than an invalid prior error."""
    a, b = exact(a), exact(b)
    if p < 3:
        raise ValueError("minimaxity certification assumes p >= 3")
    if not Fraction(p, 2) + a > 0:
        check = check_theorem2(p, a, b)
        return Certificate(p, a, b, None, Status.NOT_APPLICABLE, notes=(check.reason,))
    return certify(PriorConfig(p, a, b))
