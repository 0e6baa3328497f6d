"""The ten acceptance criteria as plain functions returning ``(ok, detail)``.

``test_acceptance.py`` runs them under pytest; running that file directly
prints one PASS/FAIL line per criterion.
"""

from __future__ import annotations

import json
import math
import os
import random
import tempfile
import time
from fractions import Fraction

import mpmath as mp
import numpy as np

from hcminimax import cli
from hcminimax.certify import (
    WINDOW,
    big_psi,
    cardano_min,
    certify_half_cauchy,
    verify_fN_positive,
    verify_window_ratio,
)
from hcminimax.hypergeom import build_fN
from hcminimax.interval import (
    Interval,
    as_interval,
    interval_newton,
    iv_add,
    iv_cbrt,
    iv_div,
    iv_exp,
    iv_mul,
    iv_powi,
    iv_sqrt,
    iv_sub,
)
from hcminimax.sim import Estimator, mc_risk
from hcminimax.sure_risk import PriorConfig, delta_quadrature_oracle, delta_sure

from oracles import grid_min

HALF = Fraction(1, 2)


def _run_cli(argv, env=None):
    """Run the CLI in-process with optional environment overrides; return
    ``(exit_code, output_bytes)``."""
    saved = {k: os.environ.get(k) for k in (env or {})}
    os.environ.update(env or {})
    try:
        with tempfile.TemporaryDirectory() as tmp:
            out = os.path.join(tmp, "out")
            code = cli.main(list(argv) + ["--out", out])
            data = open(out, "rb").read() if os.path.exists(out) else b""
    finally:
        for k, v in saved.items():
            if v is None:
                os.environ.pop(k, None)
            else:
                os.environ[k] = v
    return code, data


def _encloses(iv: Interval, target: Fraction, width: float) -> bool:
    return iv.contains(target) and iv.width <= width


# 1 ---------------------------------------------------------------------------


def criterion_1():
    t0 = time.perf_counter()
    bad = []
    for p in range(7, 31):
        code, data = _run_cli(["certify", "--p", str(p)])
        if code != 0 or json.loads(data)["status"] != "MINIMAX_CERTIFIED":
            bad.append(p)
    for p in range(3, 7):
        code, data = _run_cli(["certify", "--p", str(p)])
        if code != 2 or json.loads(data)["status"] != "INCONCLUSIVE":
            bad.append(p)
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 300
    return ok, f"p=7..30 certified, p=3..6 inconclusive, failures={bad}, {elapsed:.1f}s"


# 2 ---------------------------------------------------------------------------


def criterion_2():
    c7 = certify_half_cauchy(7)
    win = c7.window_margin
    out = c7.q3_margin
    ok = _encloses(win, Fraction(7, 100), 1e-6) and win.lo > 0
    ok &= _encloses(out, Fraction(0), 1e-6)
    detail = [f"p=7 window {win}", f"p=7 delta=1/10 {out}"]
    for p in (8, 9, 10):
        m = certify_half_cauchy(p).q3_margin
        ok &= _encloses(m, Fraction(3 * p - 23, 8), 1e-6)
        detail.append(f"p={p} {m}")
    return ok, "; ".join(detail)


# 3 ---------------------------------------------------------------------------


def criterion_3():
    t0 = time.perf_counter()
    psi = big_psi(HALF, 6)
    elapsed = time.perf_counter() - t0
    return psi.lo > 0.2 and elapsed < 1.0, f"Psi(1/2,6) in {psi}, {elapsed * 1e3:.2f} ms"


# 4 ---------------------------------------------------------------------------


def criterion_4():
    ok, parts = True, []
    for p in (7, 8, 9, 10):
        t0 = time.perf_counter()
        cert = verify_fN_positive(build_fN(HALF, Fraction(p, 2) + HALF, 8, Fraction(1, 8)))
        elapsed = time.perf_counter() - t0
        ok &= cert.verified and elapsed < 10
        parts.append(f"p={p} min_lo={cert.min_enclosure.lo:.4g} {elapsed:.2f}s")
    return ok, "; ".join(parts)


# 5 ---------------------------------------------------------------------------


def criterion_5():
    t0 = time.perf_counter()
    f20 = build_fN(HALF, 4, 20, Fraction(1, 10))
    region = (
        (0.0, math.nextafter(WINDOW[0], math.inf)),
        (math.nextafter(WINDOW[1], -math.inf), math.inf),
    )
    outside = verify_fN_positive(f20, region, tail_start=60.0)
    window = verify_window_ratio(
        7, 20, (math.nextafter(WINDOW[0], -math.inf), math.nextafter(WINDOW[1], math.inf)), "0.08"
    )
    elapsed = time.perf_counter() - t0
    ok = outside.verified and window.certificate.verified and window.ratio_lower >= 0.08 and elapsed < 30
    return ok, (
        f"f20 outside window verified={outside.verified}, window ratio >= "
        f"{window.ratio_lower:.5f} verified={window.certificate.verified}, {elapsed:.2f}s"
    )


# 6 ---------------------------------------------------------------------------


def random_configs(n, seed=20240601):
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        p = rng.randint(1, 20)
        a = Fraction(round(rng.uniform(-p / 2 + 0.1, 3.0), 3))
        b = Fraction(round(rng.uniform(0.05, 0.95), 3))
        w = round(rng.uniform(0.0, 60.0), 4)
        out.append((PriorConfig(p, a, b), w))
    return out


def delta_equivalence_campaign(n, seed=20240601):
    worst, bad = 0.0, []
    for cfg, w in random_configs(n, seed):
        enc = delta_sure(w, cfg)
        ora = delta_quadrature_oracle(w, cfg)
        gap = abs(enc.mid - ora.value)
        worst = max(worst, gap)
        if gap > enc.width + 1e-6:
            bad.append((cfg, w, gap))
        zero = delta_sure(0.0, cfg)
        if not (zero.contains(cfg.p) and zero.width <= 1e-10):
            bad.append((cfg, 0.0, zero))
    return bad, worst


def criterion_6():
    bad, worst = delta_equivalence_campaign(200)
    return not bad, f"200 configurations, max |enclosure - quadrature| = {worst:.2e}, failures={len(bad)}"


# 7 ---------------------------------------------------------------------------


def cardano_campaign(n, seed=99):
    rng = random.Random(seed)
    worst_rel, bad = 0.0, 0
    for _ in range(n):
        g2 = Fraction(round(rng.uniform(0.5, 3.0), 4))
        g4 = Fraction(round(float(8 * g2**3 / 9) * rng.uniform(1.01, 10.0), 4))
        if not 9 * g4 > 8 * g2**3:
            g4 = 8 * g2**3 / 9 * Fraction(101, 100)
        prob = cardano_min(g2, g4)
        f2, f4 = float(g2), float(g4)
        F = lambda x: -x - f2 * x * x / 2 + f4 * x**4 / 24
        best, _ = grid_min(F, 0.0, 10.0, 1e-6)
        rel = abs(prob.F_min.mid - best) / abs(best)
        worst_rel = max(worst_rel, rel)
        x_c = math.sqrt(2 * f2 / f4) * (1 + 1e-9)
        newton = interval_newton(prob.dF, prob.d2F, Interval(x_c, 10.0))
        agree = max(prob.x_star.lo, newton.lo) <= min(prob.x_star.hi, newton.hi)
        if rel > 1e-8 or not agree or newton.width > 1e-10:
            bad += 1
    return bad, worst_rel


def criterion_7():
    bad, worst = cardano_campaign(100)
    return bad == 0, f"100 (gamma2, gamma4): max relative gap to grid {worst:.2e}, Newton disagreements={bad}"


# 8 ---------------------------------------------------------------------------


def _random_interval(rng, positive=False, scale=None):
    mag = scale if scale is not None else 10 ** rng.uniform(-8, 8)
    a = rng.uniform(-1, 1) * mag
    b = rng.uniform(-1, 1) * mag
    if positive:
        a, b = abs(a), abs(b)
    return Interval(min(a, b), max(a, b))


def _inside(rng, x):
    return min(max(x.lo + (x.hi - x.lo) * rng.random(), x.lo), x.hi)


def interval_containment_campaign(n, seed=12345):
    mp.mp.dps = 50
    rng = random.Random(seed)
    ops = ["add", "sub", "mul", "div", "exp", "sqrt", "cbrt", "powi"]
    count = 0
    for k in range(n):
        op = ops[k % len(ops)]
        if op in ("add", "sub", "mul", "div"):
            x, y = _random_interval(rng), _random_interval(rng)
            if op == "div" and y.contains(0):
                lo, hi = sorted((abs(y.lo), abs(y.hi)))
                y = Interval(lo + 1e-3, hi + 2e-3)
                if rng.random() < 0.5:
                    y = -y
            a, b = Fraction(_inside(rng, x)), Fraction(_inside(rng, y))
            fn = {"add": iv_add, "sub": iv_sub, "mul": iv_mul, "div": iv_div}[op]
            ref = {"add": a + b, "sub": a - b, "mul": a * b, "div": a / b if b else None}[op]
            if ref is None:
                continue
            ok = ref in fn(x, y)
        elif op == "powi":
            x = _random_interval(rng, scale=10 ** rng.uniform(-3, 3))
            n_pow = rng.randint(0, 9)
            ok = Fraction(_inside(rng, x)) ** n_pow in iv_powi(x, n_pow)
        else:
            if op == "exp":
                x = _random_interval(rng, scale=rng.uniform(0, 700))
                fn, ref_fn = iv_exp, mp.exp
            elif op == "sqrt":
                x = _random_interval(rng, positive=True)
                fn, ref_fn = iv_sqrt, mp.sqrt
            else:
                x = _random_interval(rng)
                fn, ref_fn = iv_cbrt, lambda v: mp.sign(v) * mp.cbrt(abs(v))
            a = _inside(rng, x)
            r = fn(x)
            ref = ref_fn(mp.mpf(a))
            ok = mp.mpf(r.lo) <= ref and (math.isinf(r.hi) or ref <= mp.mpf(r.hi))
        if not ok:
            return False, count
        count += 1
    return True, count


def criterion_8():
    ok, count = interval_containment_campaign(100_000)
    steps = 0
    box = None
    from hcminimax.interval import newton_iterates

    for steps, box in newton_iterates(lambda x: x * x - 2, lambda x: 2 * x, Interval(1, 2), 100):
        if box.width < 1e-12:
            break
    newton_ok = box is not None and math.sqrt(2) in box and box.width < 1e-12 and steps <= 100
    demo = Interval(1.41, 1.42) + Interval(1.73, 1.74)
    demo_ok = demo == Interval(as_interval("3.14").lo, as_interval("3.16").hi)
    ok = ok and newton_ok and demo_ok
    return ok, (
        f"{count} containment checks passed; sqrt(2) enclosed to width {box.width:.1e} "
        f"after {steps} steps; [1.41,1.42]+[1.73,1.74] = {demo}"
    )


# 9 ---------------------------------------------------------------------------


def criterion_9(n=10**6, seed=2024):
    ok, parts = True, []
    for p in (7, 9, 12):
        t0 = time.perf_counter()
        cfg = PriorConfig.half_cauchy(p)
        worst_z, worst_excess = 0.0, -math.inf
        for r in (0, 1, 2, 5, 10, 20):
            beta = np.zeros(p)
            beta[0] = r
            pt = mc_risk(cfg, beta, n, seed)
            z = abs(pt.empirical_risk - pt.sure_mean) / pt.combined_std_err
            excess = (pt.empirical_risk - p) / pt.std_err
            worst_z, worst_excess = max(worst_z, z), max(worst_excess, excess)
            ok &= z <= 3 and pt.empirical_risk <= p + 3 * pt.std_err
        elapsed = time.perf_counter() - t0
        ok &= elapsed < 180
        parts.append(f"p={p} max|risk-SURE|/se={worst_z:.2f} max (risk-p)/se={worst_excess:.1f} {elapsed:.1f}s")
    js = mc_risk(PriorConfig.half_cauchy(7), np.zeros(7), n, seed, Estimator.JAMES_STEIN)
    js_z = abs(js.empirical_risk - 2) / js.std_err
    ok &= js_z <= 3
    parts.append(f"James-Stein at 0: {js.empirical_risk:.4f} ({js_z:.2f} se from 2)")
    return ok, "; ".join(parts)


# 10 --------------------------------------------------------------------------


def criterion_10():
    runs = [
        ["certify", "--p", "7"],
        ["certify", "--p", "12", "--a", "-2", "--b", "0.9"],
        ["sure-curve", "--p", "7", "--w-max", "30", "--steps", "31"],
        ["simulate", "--p", "7", "--beta-norms", "0,2,5", "--samples", "200000", "--seed", "11"],
    ]
    same = []
    for argv in runs:
        outs = {_run_cli(argv, {"MINIMAX_CERT_THREADS": t}) for t in ("1", "4", "1")}
        same.append(len(outs) == 1)
    return all(same), f"{sum(same)}/{len(runs)} commands byte-identical across runs and thread counts 1, 4"


CRITERIA = {
    1: ("half-Cauchy certificates for p = 3..30", criterion_1),
    2: ("exact margins 0.07, 0, (3p-23)/8", criterion_2),
    3: ("Psi(1/2, 6) > 0.2", criterion_3),
    4: ("f_8(.; 1/8) > 0 on [0, inf), p = 7..10", criterion_4),
    5: ("f_20 off the window and window ratio >= 0.08", criterion_5),
    6: ("hypergeometric SURE kernel vs quadrature", criterion_6),
    7: ("closed-form quartic minimum", criterion_7),
    8: ("interval soundness", criterion_8),
    9: ("Monte-Carlo SURE identity and risk <= p", criterion_9),
    10: ("determinism", criterion_10),
}
