"""Monte-Carlo risk of shrinkage estimators and tabulated SURE curves.

Samples are drawn in chunks of ``2**16`` rows.  Chunk ``k`` uses the
generator ``default_rng([seed, k])``, and per-chunk moments are merged in
chunk order.  Results are therefore identical for any number of worker
threads.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .exceptions import ZeroVector
from .interval import Interval
from .sure_risk import PriorConfig, delta_sure, posterior_kappa, sure_components_float

__all__ = [
    "Estimator",
    "RiskPoint",
    "CurveRow",
    "SureTable",
    "CHUNK",
    "mc_risk",
    "james_stein",
    "sure_curve",
    "sure_table",
    "worker_count",
]

CHUNK = 2**16
TABLE_W_MAX = 1000.0
TABLE_RTOL = 1e-8


class Estimator(str, enum.Enum):
    HALF_CAUCHY_BAYES = "HALF_CAUCHY_BAYES"
    BETA_PRIOR_BAYES = "BETA_PRIOR_BAYES"
    JAMES_STEIN = "JAMES_STEIN"
    IDENTITY = "IDENTITY"

    @classmethod
    def parse(cls, name: str) -> "Estimator":
        key = name.strip().upper().replace("-", "_")
        aliases = {"HALF_CAUCHY": "HALF_CAUCHY_BAYES", "BETA_PRIOR": "BETA_PRIOR_BAYES"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown estimator {name!r}") from None


@dataclass(frozen=True)
class RiskPoint:
    beta_norm: float
    n_samples: int
    empirical_risk: float
    std_err: float
    sure_mean: float
    estimator_tag: Estimator
    sure_std_err: float = 0.0

    @property
    def combined_std_err(self) -> float:
        return math.hypot(self.std_err, self.sure_std_err)


@dataclass(frozen=True)
class CurveRow:
    w: float
    delta: Interval
    risk: Interval


def worker_count() -> int:
    env = os.environ.get("MINIMAX_CERT_THREADS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("MINIMAX_CERT_THREADS must be a positive integer")
        return n
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# spline table of E[kappa | y] and Delta over u = log1p(w)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SureTable:
    cfg: PriorConfig
    kappa: CubicSpline
    delta: CubicSpline
    w_max: float
    nodes: int
    max_rel_err: float

    def __call__(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        w = np.asarray(w, dtype=float)
        u = np.log1p(w)
        kappa = self.kappa(u)
        delta = self.delta(u)
        far = w > self.w_max
        if np.any(far):
            kappa[far], delta[far] = sure_components_float(w[far], self.cfg)
        return kappa, delta


def _rel_err(approx: np.ndarray, exact: np.ndarray) -> float:
    return float(np.max(np.abs(approx - exact) / np.maximum(np.abs(exact), 1.0)))


@lru_cache(maxsize=32)
def sure_table(cfg: PriorConfig, w_max: float = TABLE_W_MAX, rtol: float = TABLE_RTOL) -> SureTable:
    """Cubic spline of ``(E[kappa], Delta)`` in ``log1p(w)``, refined until the
    error at interval midpoints is below ``rtol`` (relative, floored at 1)."""
    u_max = math.log1p(w_max)
    nodes = 513
    while True:
        u = np.linspace(0.0, u_max, nodes)
        kappa, delta = sure_components_float(np.expm1(u), cfg)
        ks, ds = CubicSpline(u, kappa), CubicSpline(u, delta)
        mid = 0.5 * (u[1:] + u[:-1])
        k_mid, d_mid = sure_components_float(np.expm1(mid), cfg)
        err = max(_rel_err(ks(mid), k_mid), _rel_err(ds(mid), d_mid))
        if err <= rtol or nodes > 2**16:
            break
        nodes = 2 * nodes - 1
    if err > rtol:
        raise ArithmeticError(f"spline table error {err:.3g} above {rtol:.3g}")
    return SureTable(cfg, ks, ds, w_max, nodes, err)


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------


def james_stein(y) -> np.ndarray:
    """Plain James-Stein estimate ``(1 - (p-2)/||y||^2) y``."""
    y = np.asarray(y, dtype=float)
    p = y.shape[-1]
    if p < 3:
        raise ValueError("James-Stein needs p >= 3")
    norm_sq = float(y @ y)
    if norm_sq == 0.0:
        raise ZeroVector("James-Stein is undefined at y = 0")
    return (1.0 - (p - 2) / norm_sq) * y


def _chunk_losses(
    tag: Estimator,
    table: Optional[SureTable],
    beta: np.ndarray,
    seed: int,
    index: int,
    rows: int,
) -> tuple[np.ndarray, np.ndarray]:
    p = beta.size
    rng = np.random.default_rng([seed, index])
    noise = rng.standard_normal((rows, p))
    y = beta + noise
    norm_sq = np.einsum("ij,ij->i", y, y)
    if tag is Estimator.IDENTITY:
        loss = np.einsum("ij,ij->i", noise, noise)
        return loss, np.full(rows, float(p))
    if tag is Estimator.JAMES_STEIN:
        c = (p - 2) / norm_sq
        sure = p - (p - 2) * c
    else:
        kappa, delta = table(0.5 * norm_sq)
        c = kappa
        sure = p - 2.0 * kappa * delta
    err = noise - c[:, None] * y
    return np.einsum("ij,ij->i", err, err), sure


def _moments(x: np.ndarray) -> tuple[int, float, float]:
    mean = float(x.mean())
    return x.size, mean, float(((x - mean) ** 2).sum())


def _merge(a: tuple[int, float, float], b: tuple[int, float, float]) -> tuple[int, float, float]:
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    d = mb - ma
    return n, ma + d * nb / n, sa + sb + d * d * na * nb / n


def mc_risk(
    cfg: PriorConfig,
    beta,
    n_samples: int,
    seed: int,
    estimator: Optional[Estimator] = None,
    workers: Optional[int] = None,
) -> RiskPoint:
    """Monte-Carlo risk ``E||beta_hat - beta||^2`` and the mean of SURE at ``beta``."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (cfg.p,):
        raise ValueError(f"beta must have length {cfg.p}")
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")
    tag = estimator or (
        Estimator.HALF_CAUCHY_BAYES if cfg.is_half_cauchy else Estimator.BETA_PRIOR_BAYES
    )
    tag = Estimator(tag)
    table = None
    if tag is Estimator.HALF_CAUCHY_BAYES:
        table = sure_table(PriorConfig.half_cauchy(cfg.p))
    elif tag is Estimator.BETA_PRIOR_BAYES:
        table = sure_table(cfg)
    elif tag is Estimator.JAMES_STEIN and cfg.p < 3:
        raise ValueError("James-Stein needs p >= 3")

    sizes = [CHUNK] * (n_samples // CHUNK)
    if n_samples % CHUNK:
        sizes.append(n_samples % CHUNK)

    def run(k: int):
        loss, sure = _chunk_losses(tag, table, beta, seed, k, sizes[k])
        return _moments(loss), _moments(sure)

    workers = workers or worker_count()
    if workers == 1 or len(sizes) == 1:
        parts = [run(k) for k in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))

    loss_m, sure_m = parts[0]
    for lm, sm in parts[1:]:
        loss_m, sure_m = _merge(loss_m, lm), _merge(sure_m, sm)
    n = loss_m[0]
    loss_se = math.sqrt(loss_m[2] / (n - 1) / n)
    sure_se = math.sqrt(sure_m[2] / (n - 1) / n)
    return RiskPoint(
        beta_norm=float(np.linalg.norm(beta)),
        n_samples=n,
        empirical_risk=loss_m[1],
        std_err=loss_se,
        sure_mean=sure_m[1],
        estimator_tag=tag,
        sure_std_err=sure_se,
    )


def sure_curve(cfg: PriorConfig, w_max: float, steps: int) -> list[CurveRow]:
    """Rigorous enclosures of ``Delta(w)`` and ``p - 2 E[kappa] Delta(w)`` on
    an even grid over ``[0, w_max]``."""
    if not w_max > 0:
        raise ValueError("w_max must be positive")
    if steps < 2:
        raise ValueError("steps must be at least 2")
    rows = []
    for i in range(steps):
        w = float(w_max) if i == steps - 1 else w_max * i / (steps - 1)
        x = Interval(w, w)
        delta = delta_sure(x, cfg)
        risk = cfg.p - 2 * posterior_kappa(x, cfg) * delta
        rows.append(CurveRow(w, delta, risk))
    return rows
