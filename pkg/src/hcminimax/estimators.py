"""scikit-learn style wrappers around the shrinkage estimators.

Each row of ``X`` is one observation ``y ~ N_p(beta, I)``; ``transform``
returns the estimate of ``beta`` for every row.  ``fit`` only learns the
dimension ``p``, since the estimators have no data-dependent parameters.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .certify import Certificate, certify
from .exceptions import ZeroVector
from .sure_risk import PriorConfig, sure_components_float

__all__ = ["BetaPriorShrinkage", "HalfCauchyShrinkage", "JamesSteinShrinkage"]


class BetaPriorShrinkage(TransformerMixin, BaseEstimator):
    """Posterior-mean estimator under the prior ``kappa**(a-1) (1-kappa)**(b-1)``
    on the shrinkage coefficient."""

    def __init__(self, a=0.5, b=0.5):
        self.a = a
        self.b = b

    def fit(self, X, y=None):
        X = check_array(X)
        a, b = self._exponents()
        self.prior_ = PriorConfig(X.shape[1], a, b)
        self.prior_.require_b_below_one()
        self.n_features_in_ = X.shape[1]
        return self

    def _exponents(self):
        return Fraction(str(self.a)), Fraction(str(self.b))

    def _components(self, X):
        check_is_fitted(self, "prior_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        w = 0.5 * np.einsum("ij,ij->i", X, X)
        return X, sure_components_float(w, self.prior_)

    def transform(self, X):
        X, (kappa, _) = self._components(X)
        return (1.0 - kappa)[:, None] * X

    def shrinkage(self, X):
        """Posterior mean of the shrinkage coefficient for every row."""
        return self._components(X)[1][0]

    def risk_estimate(self, X):
        """Unbiased estimate of the quadratic risk for every row."""
        _, (kappa, delta) = self._components(X)
        return self.prior_.p - 2.0 * kappa * delta

    def certify(self) -> Certificate:
        check_is_fitted(self, "prior_")
        return certify(self.prior_)


class HalfCauchyShrinkage(BetaPriorShrinkage):
    """The ``a = b = 1/2`` case, a half-Cauchy prior on the local scale."""

    def __init__(self):
        pass

    def _exponents(self):
        return Fraction(1, 2), Fraction(1, 2)


class JamesSteinShrinkage(TransformerMixin, BaseEstimator):
    """Plain James-Stein estimator ``(1 - (p-2)/||y||^2) y``."""

    def fit(self, X, y=None):
        X = check_array(X)
        if X.shape[1] < 3:
            raise ValueError("James-Stein needs at least 3 features")
        self.n_features_in_ = X.shape[1]
        return self

    def _norm_sq(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        norm_sq = np.einsum("ij,ij->i", X, X)
        if np.any(norm_sq == 0):
            raise ZeroVector("James-Stein is undefined at y = 0")
        return X, norm_sq

    def transform(self, X):
        X, norm_sq = self._norm_sq(X)
        return (1.0 - (X.shape[1] - 2) / norm_sq)[:, None] * X

    def risk_estimate(self, X):
        X, norm_sq = self._norm_sq(X)
        p = X.shape[1]
        return p - (p - 2) ** 2 / norm_sq
