"""Downside-risk performance measurement (Sortino ratio and its pieces)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_returns_matrix, check_weights

DEFAULT_DAY_COUNT = 365.0


@dataclass(frozen=True)
class PerformanceRecord:
    """Per-period performance of a fixed-weight portfolio.

    ``sortino`` is NaN when the downside deviation is zero (undefined ratio).
    """

    mean_return: float
    downside_dev: float
    sortino: float
    target_return: float

    @property
    def sortino_defined(self) -> bool:
        return not math.isnan(self.sortino)


def sortino_ratio(mean_return: float, downside_dev: float, target_return: float) -> float:
    """(mean - target) / downside deviation; NaN when the deviation is zero."""
    if downside_dev == 0.0:
        return math.nan
    return (mean_return - target_return) / downside_dev


def evaluate_performance(sample, weights, annual_rf: float = 0.06, *,
                         day_count: float = DEFAULT_DAY_COUNT,
                         target: str = "risk_free") -> PerformanceRecord:
    """Score a portfolio on a return panel with the Sortino ratio.

    The portfolio return series is ``p_t = sum_j w_j r_tj``. The minimum
    acceptable return defaults to the daily risk-free rate
    ``annual_rf / day_count`` (calendar-day convention); ``target`` may also
    be ``"zero"`` or ``"mean"``. Downside deviation divides by all T
    observations:

        sigma_d = sqrt(mean(min(p_t - tau, 0)^2))

    Parameters
    ----------
    sample : ReturnSample or (T, N) array
    weights : array of N weights, or any object with a ``weights`` attribute
    annual_rf : annualized risk-free rate (fraction)
    """
    returns = check_returns_matrix(getattr(sample, "returns", sample))
    if annual_rf < 0.0:
        raise ValueError(f"annual_rf must be >= 0, got {annual_rf}")
    w = check_weights(getattr(weights, "weights", weights), returns.shape[1])

    series = returns @ w
    rf_daily = annual_rf / day_count
    if target == "risk_free":
        tau = rf_daily
    elif target == "zero":
        tau = 0.0
    elif target == "mean":
        tau = float(series.mean())
    else:
        raise ValueError(f"unknown target {target!r}")

    mean_return = float(series.mean())
    shortfall = np.minimum(series - tau, 0.0)
    downside = float(np.sqrt(np.mean(shortfall**2)))
    return PerformanceRecord(
        mean_return=mean_return,
        downside_dev=downside,
        sortino=sortino_ratio(mean_return, downside, tau),
        target_return=tau,
    )
