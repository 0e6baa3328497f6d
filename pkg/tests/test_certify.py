import math
import random
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest

from hcminimax.certify import (
    Applicability,
    Branch,
    Certificate,
    Status,
    WINDOW,
    big_psi,
    cardano_min,
    certify,
    certify_half_cauchy,
    certify_params,
    check_theorem2,
    check_unique_min_shape,
    psi_inputs,
    psi_of,
    q3_lower_bound,
    verify_fN_positive,
    verify_window_ratio,
    zeta_of,
)
from hcminimax.exceptions import DiscriminantViolation, ShapeHypothesisUnverified
from hcminimax.hypergeom import IntervalPolynomial, build_fN
from hcminimax.interval import Interval, interval_newton
from hcminimax.sure_risk import PriorConfig, delta_sure

import oracles

HALF = Fraction(1, 2)


def test_zeta_exact_value():
    z = zeta_of(HALF, 6)
    assert z.contains(oracles.ZETA_HALF_6) and z.width <= 2 * math.ulp(0.02)


def test_zeta_bounds_and_monotone():
    for b in np.linspace(0.01, 0.99, 25):
        b = Fraction(float(b))
        prev = None
        for q in [Fraction(k, 4) for k in range(1, 120)]:
            z = zeta_of(b, q)
            assert 0 < z.lo and z.hi < 1 / 9
            if prev is not None:
                assert z.hi <= prev.hi
            prev = z


def test_zeta_rejects_bad_input():
    with pytest.raises(ValueError):
        zeta_of(1, 3)
    with pytest.raises(ValueError):
        zeta_of(HALF, 0)


def test_psi_of_one():
    assert psi_of(1).contains(2) and psi_of(1).width < 1e-15


def test_psi_monotone_on_separated_grid():
    grid = [Fraction(k, 1000) for k in range(1, 112)]
    vals = [psi_of(z) for z in grid]
    assert all(a.hi <= b.lo for a, b in zip(vals, vals[1:]))


def test_psi_high_precision():
    mp.mp.dps = 40
    z = oracles.ZETA_HALF_6
    ref = oracles.psi(mp.mpf(z.numerator) / z.denominator)
    g = psi_of(z)
    assert mp.mpf(g.lo) <= ref <= mp.mpf(g.hi)


def test_psi_rejects_outside_domain():
    with pytest.raises(ValueError):
        psi_of(Interval(0, 0.5))
    with pytest.raises(ValueError):
        psi_of(Interval(0.5, 1.5))


def test_big_psi_at_half_six():
    v = big_psi(HALF, 6)
    assert v.lo > 0.2
    assert v.contains(float(oracles.big_psi(0.5, 6))) or abs(v.mid - float(oracles.big_psi(0.5, 6))) < 1e-15


def test_big_psi_nondecreasing_in_q():
    vals = [big_psi(HALF, Fraction(k, 2)) for k in range(12, 41)]
    assert all(a.hi <= b.lo for a, b in zip(vals, vals[1:]))
    assert big_psi(HALF, Fraction(11, 2) + HALF).lo > 0.2  # p = 11


def test_psi_inputs_record():
    rec = psi_inputs(HALF, 6)
    assert rec.zeta == zeta_of(HALF, 6)
    assert 0 < rec.psi_val.lo and rec.psi_val.hi <= 2
    assert rec.Z.contains(rec.Z.mid)


def test_cardano_example():
    prob = cardano_min(1, 2)
    x_ref, f_ref = oracles.CARDANO_G2_1_G4_2
    assert prob.x_star.lo - 1e-15 <= x_ref <= prob.x_star.hi + 1e-15
    best, arg = oracles.grid_min(lambda x: -x - x * x / 2 + x**4 / 12, 0.0, 10.0, 1e-6)
    assert abs(prob.F_min.mid - best) <= 1e-8 * abs(best)
    assert abs(prob.F_min.mid - f_ref) < 1e-14
    direct = prob.F(prob.x_star)
    assert max(direct.lo, prob.F_min.lo) <= min(direct.hi, prob.F_min.hi)
    newton = interval_newton(prob.dF, prob.d2F, Interval(1.0 + 1e-9, 10.0))
    assert max(newton.lo, prob.x_star.lo) <= min(newton.hi, prob.x_star.hi)


def test_cardano_discriminant():
    with pytest.raises(DiscriminantViolation):
        cardano_min(3, 24)  # 9 * 24 = 216 = 8 * 27
    with pytest.raises(ValueError):
        cardano_min(-1, 2)


def test_cardano_random_campaign():
    from acceptance_checks import cardano_campaign

    bad, worst = cardano_campaign(10, seed=5)
    assert bad == 0 and worst < 1e-8


def test_shape_checks():
    f8 = build_fN(HALF, 4, 8, Fraction(1, 8))
    assert check_unique_min_shape(f8)
    b = Fraction(3, 10)
    f4 = build_fN(b, 2, 4, (1 - b) / (b + 2))
    assert check_unique_min_shape(f4)
    wavy = IntervalPolynomial(tuple(Interval(c, c) for c in (1.0, 1.0, -1.0, 1.0, -1.0)))
    assert not check_unique_min_shape(wavy)
    ambiguous = IntervalPolynomial((Interval(1, 1), Interval(-1, 1), Interval(1, 1)))
    assert not check_unique_min_shape(ambiguous)


def test_check_theorem2_examples():
    assert check_theorem2(PriorConfig.half_cauchy(11)).status is Applicability.APPLICABLE
    r10 = check_theorem2(PriorConfig.half_cauchy(10))
    assert r10.status is Applicability.NOT_APPLICABLE and "below" in r10.reason
    r3 = check_theorem2(3, -2, HALF)
    assert r3.status is Applicability.NOT_APPLICABLE and "not positive" in r3.reason
    with pytest.raises(ValueError):
        check_theorem2(2, 0, HALF)


@pytest.mark.parametrize("p", range(11, 40))
def test_check_theorem2_margin_formula(p):
    # 1/2 - 16/(1+3p) = (3p-31)/(2(1+3p)) > 0
    assert Fraction(1, 2) - Fraction(16, 1 + 3 * p) == Fraction(3 * p - 31, 2 * (1 + 3 * p))
    assert check_theorem2(PriorConfig.half_cauchy(p)).applicable


def test_psi_monotonicity_transfer():
    for b in (Fraction(3, 10), HALF, Fraction(7, 10)):
        seen = False
        for k in range(1, 81):
            ok = big_psi(b, Fraction(k, 4)).lo >= 0
            assert ok or not seen
            seen |= ok


def test_q3_lower_bound_examples():
    for p in (8, 9, 10):
        assert q3_lower_bound(PriorConfig.half_cauchy(p), Fraction(1, 8)).contains(Fraction(3 * p - 23, 8))
    assert q3_lower_bound(PriorConfig.half_cauchy(7), Fraction(1, 10)).contains(0)
    assert q3_lower_bound(PriorConfig.half_cauchy(11), Fraction(1, 5)).contains(Fraction(1, 5))


def test_certify_p7():
    c = certify_half_cauchy(7)
    assert c.status is Status.MINIMAX_CERTIFIED and c.branch is Branch.CASE_P7
    assert c.window_margin.contains(Fraction(7, 100)) and c.window_margin.lo > 0
    assert c.window == WINDOW
    assert all(a.verified for a in c.artifacts)


def test_certify_p9_and_p5():
    c9 = certify_half_cauchy(9)
    assert c9.certified and c9.branch is Branch.CASE_P8_10
    assert c9.q3_margin.contains(HALF) and c9.q12_margin.contains(2)
    assert certify_half_cauchy(5).status is Status.INCONCLUSIVE
    with pytest.raises(ValueError):
        certify_half_cauchy(2)


def test_certify_general_priors():
    c = certify(PriorConfig(12, Fraction(-2), Fraction(9, 10)))
    assert c.status is Status.MINIMAX_CERTIFIED and c.branch is Branch.THEOREM2_GENERAL
    bad = certify(PriorConfig(10, HALF, Fraction(2, 5)))
    assert bad.status is Status.NOT_APPLICABLE and bad.notes
    assert certify_params(3, -2, HALF).status is Status.NOT_APPLICABLE


def test_certificate_invariant():
    with pytest.raises(ValueError):
        Certificate(7, HALF, HALF, Branch.CASE_P7, Status.MINIMAX_CERTIFIED, q12_margin=Interval(-1, 1))


@pytest.mark.parametrize("p", [7, 8, 9, 10])
def test_f8_positive_everywhere(p):
    poly = build_fN(HALF, Fraction(p, 2) + HALF, 8, Fraction(1, 8))
    cert = verify_fN_positive(poly)
    assert cert.verified
    assert math.isinf(cert.domain.hi)
    assert cert.recheck(poly, poly.derivative())


def test_f20_outside_and_inside_window():
    f20 = build_fN(HALF, 4, 20, Fraction(1, 10))
    outside = verify_fN_positive(
        f20, ((0.0, math.nextafter(9.6, 10)), (math.nextafter(12.1, 12), math.inf)), tail_start=60.0
    )
    assert outside.verified
    inside = verify_fN_positive(f20, ((9.6, 12.1),))
    assert not inside.verified
    assert f20(Interval(11.0, 11.0)).hi < 0  # the window really needs the separate bound


def test_window_ratio_certificate():
    check = verify_window_ratio()
    assert check.certificate.verified and check.ratio_lower >= 0.08


def test_unbounded_needs_shape():
    wavy = IntervalPolynomial(tuple(Interval(c, c) for c in (1.0, 1.0, -1.0, 1.0)))
    with pytest.raises(ShapeHypothesisUnverified):
        verify_fN_positive(wavy)


def test_quartic_minimum_chain():
    """min over w of f_4(w; d)/d - 3/(1-b) equals the closed form from the
    quartic minimum, for 50 random (b, q) with Psi >= 0."""
    from scipy.optimize import minimize_scalar

    rng = random.Random(8)
    tested = 0
    while tested < 50:
        b = Fraction(round(rng.uniform(0.2, 0.95), 3))
        q = Fraction(round(rng.uniform(0.5, 30), 2))
        if big_psi(b, q).lo < 0:
            continue
        d = (1 - b) / (b + 2)
        poly = build_fN(b, q, 4, d)
        coeffs = [float(c / d) for c in poly.exact_coeffs]
        f = lambda w: sum(c * w**i for i, c in enumerate(coeffs))
        w_hi = 10.0 * float(b + q + 2)
        grid = np.linspace(0, w_hi, 20001)
        k = int(np.argmin(f(grid)))
        res = minimize_scalar(f, bracket=(grid[max(k - 1, 0)], grid[k], grid[min(k + 1, 20000)]))
        numeric = res.fun - 3 / float(1 - b)
        g = psi_of(zeta_of(b, q))
        K = Interval.from_fraction(9 * (b + q + 2) / (4 * b * (b + q + 1)))
        closed = -(K * (2 * g + g * g))
        assert abs(numeric - closed.mid) <= 1e-8 * max(1.0, abs(closed.mid))
        tested += 1


def test_certified_delta_nonnegative_on_grid():
    cfg = PriorConfig.half_cauchy(7)
    lows = [delta_sure(w, cfg).lo for w in np.linspace(0.0, 100.0, 1000)]
    assert min(lows) >= -1e-12
