"""risklab: downside-risk portfolio optimization and worst-case robustness studies.

Four optimizers over the fully-invested long-only simplex — value-at-risk,
conditional value-at-risk, and a worst-case variant of each — plus the data
plumbing, bootstrap uncertainty bounds, Sortino-ratio scoring, and a CLI
that sweeps the confidence parameter across market and simulated scenarios.
"""

__version__ = "0.1.0"

from .data import PriceTable, ReturnSample, align_and_log_returns, load_price_csv
from .estimators import (
    CVaRPortfolio,
    VaRPortfolio,
    WorstCaseCVaRPortfolio,
    WorstCaseVaRPortfolio,
)
from .exceptions import ConfigError, DataError, RiskLabError, SolverError
from .metrics import PerformanceRecord, evaluate_performance
from .risk import (
    MixtureSpec,
    Portfolio,
    empirical_cvar,
    empirical_var,
    kappa_chebyshev,
    kappa_gaussian,
    minimize_cvar,
    minimize_var,
    minimize_wcvar,
    minimize_wvar,
)
from .stats import (
    MomentEstimate,
    UncertaintyBounds,
    bootstrap_bounds,
    estimate_moments,
    inverse_normal_cdf,
    psd_repair,
    simulate_mvn,
)

__all__ = [
    "__version__",
    "PriceTable",
    "ReturnSample",
    "load_price_csv",
    "align_and_log_returns",
    "MomentEstimate",
    "UncertaintyBounds",
    "estimate_moments",
    "bootstrap_bounds",
    "psd_repair",
    "simulate_mvn",
    "inverse_normal_cdf",
    "PerformanceRecord",
    "evaluate_performance",
    "Portfolio",
    "MixtureSpec",
    "kappa_chebyshev",
    "kappa_gaussian",
    "minimize_var",
    "minimize_wvar",
    "empirical_var",
    "empirical_cvar",
    "minimize_cvar",
    "minimize_wcvar",
    "VaRPortfolio",
    "WorstCaseVaRPortfolio",
    "CVaRPortfolio",
    "WorstCaseCVaRPortfolio",
    "RiskLabError",
    "DataError",
    "ConfigError",
    "SolverError",
]
