"""Bayes estimator and Stein's unbiased risk estimate under a beta-type prior.

The prior on the shrinkage coefficient is ``kappa**(a-1) (1-kappa)**(b-1)``
with ``q = p/2 + a``.  With ``w = ||y||**2 / 2`` everything reduces to four
Kummer functions:

* posterior mean of kappa: ``q/(q+b) * M(b, b+q+1, w) / M(b, b+q, w)``
* SURE kernel: ``Delta(w) = p/2 - a - 2 + 2(q+1) R(b+q+1) - q R(b+q)`` with
  ``R(c) = M(b-1, c, w) / M(b, c, w)``
* risk estimate: ``p - 2 E[kappa | y] Delta(w)``

Rigorous functions return :class:`~hcminimax.interval.Interval` enclosures.
``delta_quadrature_oracle`` recomputes the kernel from its defining
integrals, and ``sure_components_float`` is a vectorised floating-point
path for Monte-Carlo work.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Union

import mpmath
import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from .exceptions import QuadratureNonConvergence
from .hypergeom import exact, kummer_scaled, ratio_enclosure
from .interval import PI, LN2, Interval, as_interval, iv_exp, iv_hull, iv_intersect, iv_ldexp, iv_powi, iv_sqrt

__all__ = [
    "PriorConfig",
    "SureValue",
    "QuadratureValue",
    "delta_sure",
    "delta_quadrature_oracle",
    "posterior_kappa",
    "risk_estimate",
    "shrink_factor",
    "bayes_estimate",
    "marginal_density",
    "beta_function",
    "sure_components_float",
]

Real = Union[int, float, Fraction, str]


@dataclass(frozen=True)
class PriorConfig:
    """Dimension ``p`` and prior exponents ``(a, b)``, held as exact rationals."""

    p: int
    a: Fraction = Fraction(1, 2)
    b: Fraction = Fraction(1, 2)

    def __post_init__(self) -> None:
        if isinstance(self.p, bool) or int(self.p) != self.p:
            raise ValueError("p must be an integer")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "a", exact(self.a))
        object.__setattr__(self, "b", exact(self.b))
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if not self.q > 0:
            raise ValueError(f"p/2 + a must be positive, got {self.q}")
        if not self.b > 0:
            raise ValueError("b must be positive")

    @classmethod
    def half_cauchy(cls, p: int) -> "PriorConfig":
        return cls(p, Fraction(1, 2), Fraction(1, 2))

    @property
    def q(self) -> Fraction:
        return Fraction(self.p, 2) + self.a

    @property
    def is_half_cauchy(self) -> bool:
        return self.a == Fraction(1, 2) and self.b == Fraction(1, 2)

    def require_b_below_one(self) -> None:
        if not self.b < 1:
            raise ValueError("this computation needs 0 < b < 1")


@dataclass(frozen=True)
class SureValue:
    w: float
    delta: Interval
    risk: Interval
    shrink_weight: Interval


class QuadratureValue(NamedTuple):
    value: float
    error: float


def _kummer_ratio(b0: Fraction, c0: Fraction, b1: Fraction, c1: Fraction, w) -> Interval:
    """Enclosure of ``M(b0, c0, w) / M(b1, c1, w)`` for a positive denominator."""
    num, e_num = kummer_scaled(b0, c0, w)
    den, e_den = kummer_scaled(b1, c1, w)
    return iv_ldexp(num / den, e_num - e_den)


def delta_sure(w: Union[Real, Interval], cfg: PriorConfig) -> Interval:
    """Enclosure of the SURE kernel ``Delta(w; a, b)`` (needs ``0 < b < 1``)."""
    cfg.require_b_below_one()
    w = as_interval(w)
    if w.lo < 0:
        raise ValueError("w must be nonnegative")
    b, q = cfg.b, cfg.q
    base = Interval.from_fraction(Fraction(cfg.p, 2) - cfg.a - 2)
    r1 = ratio_enclosure(b, b + q + 1, w)
    r0 = ratio_enclosure(b, b + q, w)
    return base + Interval.from_fraction(2 * (q + 1)) * r1 - Interval.from_fraction(q) * r0


def posterior_kappa(w: Union[Real, Interval], cfg: PriorConfig) -> Interval:
    """Enclosure of ``E[kappa | y]`` at ``w = ||y||**2 / 2``."""
    w = as_interval(w)
    b, q = cfg.b, cfg.q
    ratio = _kummer_ratio(b, b + q + 1, b, b + q, w)
    value = Interval.from_fraction(q / (q + b)) * ratio
    return iv_intersect(value, Interval(0.0, 1.0)) or value


def risk_estimate(y_norm_sq: Real, cfg: PriorConfig) -> SureValue:
    """Stein's unbiased risk estimate ``R(||y||**2)`` with its ingredients."""
    y_norm_sq = float(y_norm_sq)
    if y_norm_sq < 0:
        raise ValueError("||y||^2 must be nonnegative")
    w = Interval.from_fraction(Fraction(y_norm_sq) / 2)
    delta = delta_sure(w, cfg)
    kappa = posterior_kappa(w, cfg)
    risk = cfg.p - 2 * kappa * delta
    return SureValue(w=w.mid, delta=delta, risk=risk, shrink_weight=kappa)


def shrink_factor(y_norm_sq: Real, cfg: PriorConfig) -> Interval:
    """Enclosure of ``1 - E[kappa | y]``, the factor multiplying ``y``."""
    y_norm_sq = float(y_norm_sq)
    if y_norm_sq < 0:
        raise ValueError("||y||^2 must be nonnegative")
    return 1 - posterior_kappa(Interval.from_fraction(Fraction(y_norm_sq) / 2), cfg)


def bayes_estimate(y, cfg: PriorConfig) -> np.ndarray:
    """Posterior mean of the normal mean vector (a point estimate)."""
    y = np.asarray(y, dtype=float)
    if y.shape != (cfg.p,):
        raise ValueError(f"expected a vector of length {cfg.p}, got shape {y.shape}")
    return shrink_factor(float(y @ y), cfg).mid * y


def beta_function(x: Real, y: Real) -> Interval:
    """Enclosure of ``B(x, y)``; evaluated by mpmath at 60 digits and widened."""
    with mpmath.workdps(60):
        v = mpmath.beta(mpmath.mpf(exact(x).numerator) / exact(x).denominator,
                        mpmath.mpf(exact(y).numerator) / exact(y).denominator)
        man, exp_ = v.man, v.exp
    val = Fraction(int(man)) * (Fraction(2) ** int(exp_))
    slack = val / 10**45
    lo = Interval.from_fraction(val - slack)
    hi = Interval.from_fraction(val + slack)
    return iv_hull(lo, hi)


def marginal_density(y_norm_sq: Real, cfg: PriorConfig) -> Interval:
    """Enclosure of the marginal density ``m(y)`` at ``||y||**2 = y_norm_sq``.

    Uses ``m = (2 pi)**(-p/2) B(q, b) exp(-w) M(b, b+q, w)`` with
    ``w = ||y||**2 / 2``; the factor ``exp(-w) M(b, b+q, w)`` lies in (0, 1].
    """
    y_norm_sq = float(y_norm_sq)
    if y_norm_sq < 0:
        raise ValueError("||y||^2 must be nonnegative")
    w = Interval.from_fraction(Fraction(y_norm_sq) / 2)
    mant, scale = kummer_scaled(cfg.b, cfg.b + cfg.q, w)
    damped = mant * iv_exp(scale * LN2 - w)
    damped = iv_intersect(damped, Interval(0.0, 1.0)) or damped
    two_pi = 2 * PI
    half, odd = divmod(cfg.p, 2)
    norm = iv_powi(two_pi, -half)
    if odd:
        norm = norm / iv_sqrt(two_pi)
    return norm * beta_function(cfg.q, cfg.b) * damped


# ---------------------------------------------------------------------------
# quadrature oracle
# ---------------------------------------------------------------------------


def _kappa_integral(k: int, w: float, q: float, b: float) -> tuple[float, float]:
    """``int_0^1 kappa**(q-1+k) (1-kappa)**(b-1) exp(-w kappa) dkappa``.

    Substituting ``1 - kappa = t**(1/b)`` turns ``(1-kappa)**(b-1) dkappa``
    into ``dt / b``.  The remaining ``kappa**(q-1+k)`` behaves like
    ``(1-t)**(q-1+k)`` at ``t = 1``; the end piece ``[t0, 1]`` treats it as an
    algebraic weight, with ``t0`` chosen so the piece spans the peak of
    ``exp(-w kappa)`` for large ``w``.
    """
    alpha = q - 1 + k

    def kappa_of(t: float) -> float:
        return -math.expm1(math.log(t) / b) if t > 0 else 1.0

    def plain(t: float) -> float:
        u = kappa_of(t)
        return u**alpha * math.exp(-w * u)

    def weighted(t: float) -> float:
        if t >= 1.0:
            return (1.0 / b) ** alpha
        u = kappa_of(t)
        return (u / (1.0 - t)) ** alpha * math.exp(-w * u)

    # kappa = 1 - t**(1/b) ~ (1 - t)/b near t = 1; cover kappa up to ~40/w
    span = min(0.5, 40.0 * b / max(w, 1.0) + 1e-3)
    t0 = 1.0 - span
    last = None
    for epsrel in (1e-13, 1e-11, 1e-9):
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                head, e_head = integrate.quad(
                    plain, 0.0, t0, epsabs=0.0, epsrel=epsrel, limit=500
                )
                tail, e_tail = integrate.quad(
                    weighted, t0, 1.0, weight="alg", wvar=(0.0, alpha),
                    epsabs=0.0, epsrel=epsrel, limit=500,
                )
            except integrate.IntegrationWarning as exc:
                last = exc
                continue
        return (head + tail) / b, (abs(e_head) + abs(e_tail)) / b
    raise QuadratureNonConvergence(str(last))


def delta_quadrature_oracle(w: float, cfg: PriorConfig) -> QuadratureValue:
    """``Delta(w)`` from its three defining kappa-integrals by adaptive quadrature."""
    w = float(w)
    if w < 0:
        raise ValueError("w must be nonnegative")
    q, b, p = float(cfg.q), float(cfg.b), cfg.p
    i0, e0 = _kappa_integral(0, w, q, b)
    i1, e1 = _kappa_integral(1, w, q, b)
    i2, e2 = _kappa_integral(2, w, q, b)
    t2 = 2 * w * i2 / i1
    t1 = w * i1 / i0
    value = p - t2 + t1
    error = abs(t2) * (e2 / i2 + e1 / i1) + abs(t1) * (e1 / i1 + e0 / i0)
    error += 8 * np.finfo(float).eps * (p + abs(t2) + abs(t1))
    return QuadratureValue(value, error)


# ---------------------------------------------------------------------------
# vectorised floating-point path
# ---------------------------------------------------------------------------


def _log_terms(b0: float, c: float, logw: np.ndarray, n_terms: int) -> np.ndarray:
    """``log|t_i(w)|`` for i = 1..n_terms of the series of ``M(b0, c, w)``."""
    j = np.arange(n_terms, dtype=float)
    steps = np.log(np.abs(b0 + j)) - np.log(c + j) - np.log1p(j)
    coef = np.cumsum(steps)
    return coef[None, :] + logw[:, None] * np.arange(1, n_terms + 1, dtype=float)


def sure_components_float(w, cfg: PriorConfig, chunk_cells: int = 4_000_000):
    """Return ``(E[kappa | y], Delta(w))`` as float arrays for an array of ``w``.

    Series are summed in log space, which keeps large ``w`` finite; the
    truncation point lies ``12 sqrt(w)`` past the term peak.
    """
    cfg.require_b_below_one()
    w = np.asarray(w, dtype=float)
    flat = w.ravel()
    if np.any(flat < 0):
        raise ValueError("w must be nonnegative")
    p, a, b, q = cfg.p, float(cfg.a), float(cfg.b), float(cfg.q)
    kappa = np.empty_like(flat)
    delta = np.empty_like(flat)
    order = np.argsort(flat, kind="stable")
    start = 0
    while start < flat.size:
        wmax = flat[order[min(start + 1023, flat.size - 1)]]
        n_terms = int(wmax + 12.0 * math.sqrt(wmax) + 60)
        rows = max(1, min(1024, chunk_cells // n_terms))
        idx = order[start:start + rows]
        wc = flat[idx]
        with np.errstate(divide="ignore"):
            logw = np.log(wc)
        log_mb = {}
        log_s = {}
        for shift in (0, 1):
            c = b + q + shift
            pos = _log_terms(b, c, logw, n_terms)
            log_mb[shift] = np.logaddexp(0.0, logsumexp(pos, axis=1))
            neg = _log_terms(b - 1.0, c, logw, n_terms)
            log_s[shift] = logsumexp(neg, axis=1)
        ratio = {
            s: np.exp(-log_mb[s]) - np.exp(log_s[s] - log_mb[s]) for s in (0, 1)
        }
        kappa[idx] = q / (q + b) * np.exp(log_mb[1] - log_mb[0])
        delta[idx] = p / 2 - a - 2 + 2 * (q + 1) * ratio[1] - q * ratio[0]
        start += rows
    return kappa.reshape(w.shape), delta.reshape(w.shape)
