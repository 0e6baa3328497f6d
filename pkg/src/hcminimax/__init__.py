"""Rigorous SURE computations and minimaxity certificates for shrinkage
estimators under beta-type priors on the shrinkage coefficient."""

__version__ = "0.1.0"

from .certify import Certificate, Status, certify, certify_half_cauchy
from .estimators import BetaPriorShrinkage, HalfCauchyShrinkage, JamesSteinShrinkage
from .interval import Interval, interval_newton, verify_positive_on
from .sim import Estimator, RiskPoint, james_stein, mc_risk, sure_curve
from .sure_risk import PriorConfig, delta_quadrature_oracle, delta_sure, risk_estimate

__all__ = [
    "__version__",
    "BetaPriorShrinkage",
    "Certificate",
    "Estimator",
    "HalfCauchyShrinkage",
    "Interval",
    "JamesSteinShrinkage",
    "PriorConfig",
    "RiskPoint",
    "Status",
    "certify",
    "certify_half_cauchy",
    "delta_quadrature_oracle",
    "delta_sure",
    "interval_newton",
    "james_stein",
    "mc_risk",
    "risk_estimate",
    "sure_curve",
    "verify_positive_on",
]
