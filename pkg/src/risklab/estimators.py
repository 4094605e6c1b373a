"""Scikit-learn style front-end for the four portfolio optimizers.

Each estimator consumes a ``(T, N)`` matrix of per-period returns (or a
:class:`~risklab.data.ReturnSample`) in ``fit``, exposes the solved weights
as ``weights_``, maps ``predict`` to the portfolio return series, and scores
with the Sortino ratio, so the optimizers drop into pipelines, grid searches,
and cross-validation like any other estimator.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_returns_matrix
from .metrics import evaluate_performance
from .risk import (
    MixtureSpec,
    minimize_cvar,
    minimize_var,
    minimize_wcvar,
    minimize_wvar,
)
from .stats import bootstrap_bounds, estimate_moments


class BasePortfolioOptimizer(BaseEstimator):
    """Shared fit/predict/score plumbing; subclasses implement ``_solve``."""

    def __init__(self, epsilon=0.05, annual_rf=0.06):
        self.epsilon = epsilon
        self.annual_rf = annual_rf

    def _solve(self, returns):
        raise NotImplementedError

    def fit(self, X, y=None):
        """Solve the model on a (T, N) return panel.

        ``y`` is ignored; it is accepted for pipeline compatibility.
        """
        returns = check_returns_matrix(getattr(X, "returns", X), min_rows=2)
        portfolio = self._solve(returns)
        self.portfolio_ = portfolio
        self.weights_ = portfolio.weights
        self.objective_ = portfolio.objective_value
        self.gamma_ = portfolio.gamma
        self.n_assets_ = returns.shape[1]
        return self

    def predict(self, X):
        """Portfolio return series of the fitted weights on a return panel."""
        check_is_fitted(self, "weights_")
        returns = check_returns_matrix(getattr(X, "returns", X))
        if returns.shape[1] != self.n_assets_:
            raise ValueError(
                f"X has {returns.shape[1]} assets, fitted on {self.n_assets_}"
            )
        return returns @ self.weights_

    def score(self, X, y=None):
        """Sortino ratio of the fitted weights on a return panel."""
        check_is_fitted(self, "weights_")
        record = evaluate_performance(X, self.weights_, annual_rf=self.annual_rf)
        return record.sortino


class VaRPortfolio(BasePortfolioOptimizer):
    """Minimum generalized value-at-risk portfolio from sample moments.

    Parameters
    ----------
    epsilon : tail probability of the VaR level (confidence ``1 - epsilon``)
    kappa : ``"chebyshev"`` for the distribution-free risk factor,
        ``"gaussian"`` for the normal quantile factor
    """

    def __init__(self, epsilon=0.05, kappa="chebyshev", annual_rf=0.06):
        super().__init__(epsilon=epsilon, annual_rf=annual_rf)
        self.kappa = kappa

    def _solve(self, returns):
        return minimize_var(estimate_moments(returns), self.epsilon, self.kappa)


class WorstCaseVaRPortfolio(BasePortfolioOptimizer):
    """Worst-case VaR portfolio under bootstrap mean/covariance bounds."""

    def __init__(self, epsilon=0.05, kappa="chebyshev", confidence=0.95,
                 n_resamples=1000, random_state=0, annual_rf=0.06):
        super().__init__(epsilon=epsilon, annual_rf=annual_rf)
        self.kappa = kappa
        self.confidence = confidence
        self.n_resamples = n_resamples
        self.random_state = random_state

    def _solve(self, returns):
        moments = estimate_moments(returns)
        bounds = bootstrap_bounds(returns, confidence=self.confidence,
                                  resamples=self.n_resamples,
                                  seed=self.random_state)
        self.bounds_ = bounds
        return minimize_wvar(moments, bounds, self.epsilon, self.kappa)


class CVaRPortfolio(BasePortfolioOptimizer):
    """Minimum scenario CVaR portfolio (tail expected loss at level epsilon)."""

    def _solve(self, returns):
        return minimize_cvar(returns, self.epsilon)


class WorstCaseCVaRPortfolio(BasePortfolioOptimizer):
    """Worst-case CVaR portfolio over ``n_blocks`` chronological sample blocks."""

    def __init__(self, epsilon=0.05, n_blocks=2, annual_rf=0.06):
        super().__init__(epsilon=epsilon, annual_rf=annual_rf)
        self.n_blocks = n_blocks

    def _solve(self, returns):
        mix = MixtureSpec.chronological(returns.shape[0], self.n_blocks)
        return minimize_wcvar(returns, self.epsilon, mix)
