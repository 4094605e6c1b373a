"""The four downside-risk models and their empirical cross-check evaluators.

Loss convention throughout: the loss of portfolio x on return row r is
``-r' x``. All optimizers search the fully-invested no-short-selling simplex
``{x : x >= 0, sum x = 1}``.

* ``minimize_var``  : kappa(eps) * sqrt(x' cov x) - mean' x with point moments.
* ``minimize_wvar`` : the same objective with a bootstrap lower mean bound and
  PSD-repaired upper covariance bound (separable worst-case parameters).
* ``minimize_cvar`` : scenario LP for the expected loss in the worst eps tail.
* ``minimize_wcvar``: worst case of the tail expectation over the mixture of
  per-block empirical distributions; the mixture weights never appear in the
  LP (the max over blocks optimizes over them implicitly).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_epsilon, check_returns_matrix, check_weights
from .exceptions import SolverError
from .solvers import (
    DEFAULT_MAX_ITERS,
    DEFAULT_TOL,
    STATUS_OPTIMAL,
    LinearProgram,
    SimplexProblem,
    Solution,
    solve_lp,
    solve_simplex_cone,
)
from .stats import MomentEstimate, UncertaintyBounds, inverse_normal_cdf

logger = logging.getLogger(__name__)

MODEL_VAR = "VaR"
MODEL_WVAR = "WVaR"
MODEL_CVAR = "CVaR"
MODEL_WCVAR = "WCVaR"

MAX_MIXTURE_COMPONENTS = 5


@dataclass(frozen=True)
class Portfolio:
    """Optimal weights for one model at one confidence parameter."""

    weights: np.ndarray
    objective_value: float
    model: str
    epsilon: float
    gamma: float | None = None
    iterations: int = 0
    kkt_residual: float = 0.0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.min() < -1e-10:
            raise ValueError(f"negative weight {w.min():.3g}")
        if abs(w.sum() - 1.0) > 1e-8:
            raise ValueError(f"weights sum to {w.sum():.12g}, not 1")
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class MixtureSpec:
    """Partition of the scenario rows into the prior likelihood blocks.

    ``block_sizes`` must partition the sample rows; the mixture weights over
    the blocks are implicit (the optimizer guards against the worst of them)
    and are therefore not stored.
    """

    l: int
    block_sizes: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= self.l <= MAX_MIXTURE_COMPONENTS:
            raise ValueError(f"l must be in 1..{MAX_MIXTURE_COMPONENTS}, got {self.l}")
        sizes = tuple(int(s) for s in self.block_sizes)
        if len(sizes) != self.l:
            raise ValueError(f"{len(sizes)} block sizes for l={self.l}")
        if any(s < 1 for s in sizes):
            raise ValueError("every block needs at least one row")
        object.__setattr__(self, "block_sizes", sizes)

    @classmethod
    def chronological(cls, n_samples: int, l: int) -> "MixtureSpec":
        """Contiguous blocks of floor(S/l) rows, remainder to the earliest blocks."""
        if n_samples < l:
            raise ValueError(f"cannot split {n_samples} rows into {l} blocks")
        base, rem = divmod(n_samples, l)
        sizes = tuple(base + (1 if j < rem else 0) for j in range(l))
        return cls(l=l, block_sizes=sizes)

    def slices(self):
        """Row slices of each block, in chronological order."""
        out = []
        start = 0
        for size in self.block_sizes:
            out.append(slice(start, start + size))
            start += size
        return out

    @property
    def n_samples(self) -> int:
        return sum(self.block_sizes)


# ---------------------------------------------------------------------------
# risk factors
# ---------------------------------------------------------------------------


def kappa_chebyshev(eps: float) -> float:
    """Distribution-free risk factor sqrt((1 - eps) / eps), eps in (0, 1)."""
    eps = check_epsilon(eps, upper=1.0, inclusive=False)
    return math.sqrt((1.0 - eps) / eps)


def kappa_gaussian(eps: float) -> float:
    """Gaussian risk factor -Phi^{-1}(eps), eps in (0, 0.5)."""
    eps = check_epsilon(eps, upper=0.5, inclusive=False)
    return -inverse_normal_cdf(eps)


_KAPPA_KINDS = {"chebyshev": kappa_chebyshev, "gaussian": kappa_gaussian}


def risk_factor(eps: float, kind: str = "chebyshev") -> float:
    try:
        return _KAPPA_KINDS[kind](eps)
    except KeyError:
        raise ValueError(f"unknown kappa kind {kind!r}") from None


# ---------------------------------------------------------------------------
# mean / covariance models
# ---------------------------------------------------------------------------


def _solve_cone_model(kappa, cov, mean, model, eps, tol, max_iters) -> Portfolio:
    solution = solve_simplex_cone(
        SimplexProblem(kappa=kappa, cov=cov, mean=mean, tol=tol, max_iters=max_iters)
    )
    if solution.status != STATUS_OPTIMAL:
        raise SolverError(
            f"{model} solve at eps={eps:g} ended with status={solution.status} "
            f"after {solution.iterations} iterations (gap {solution.kkt_residual:.3g})"
        )
    return Portfolio(
        weights=solution.point,
        objective_value=solution.value,
        model=model,
        epsilon=eps,
        iterations=solution.iterations,
        kkt_residual=solution.kkt_residual,
    )


def minimize_var(moments: MomentEstimate, eps: float, kappa_kind: str = "chebyshev",
                 *, tol: float = DEFAULT_TOL, max_iters: int = DEFAULT_MAX_ITERS) -> Portfolio:
    """Minimize the generalized value-at-risk objective under point moments."""
    kappa = risk_factor(eps, kappa_kind)
    return _solve_cone_model(kappa, moments.cov, moments.mean, MODEL_VAR, eps,
                             tol, max_iters)


def minimize_wvar(moments: MomentEstimate, bounds: UncertaintyBounds, eps: float,
                  kappa_kind: str = "chebyshev", *, tol: float = DEFAULT_TOL,
                  max_iters: int = DEFAULT_MAX_ITERS) -> Portfolio:
    """Worst-case VaR under separable bootstrap bounds.

    Same cone objective as :func:`minimize_var` but with the PSD-repaired
    covariance upper bound and the componentwise mean lower bound.
    """
    if bounds.mean_lower.size != moments.n_assets:
        raise ValueError("bounds and moments describe different asset universes")
    kappa = risk_factor(eps, kappa_kind)
    return _solve_cone_model(kappa, bounds.cov_upper_psd, bounds.mean_lower,
                             MODEL_WVAR, eps, tol, max_iters)


# ---------------------------------------------------------------------------
# empirical tail evaluators
# ---------------------------------------------------------------------------


def _loss_series(sample, weights) -> np.ndarray:
    returns = check_returns_matrix(getattr(sample, "returns", sample))
    w = check_weights(getattr(weights, "weights", weights), returns.shape[1])
    return -(returns @ w)


def empirical_var(sample, weights, eps: float) -> float:
    """Empirical VaR: the ceil(S * (1 - eps))-th smallest portfolio loss."""
    eps = check_epsilon(eps, upper=1.0, inclusive=True)
    losses = np.sort(_loss_series(sample, weights))
    rank = max(int(math.ceil(losses.size * (1.0 - eps))), 1)
    return float(losses[rank - 1])


def empirical_cvar(sample, weights, eps: float) -> tuple[float, float]:
    """Exact scenario CVaR of a fixed portfolio, by scanning loss order statistics.

    Minimizes ``gamma + mean([loss - gamma]^+) / eps`` over gamma; the minimum
    is attained at the empirical VaR, so no search is needed. Returns
    ``(cvar, gamma)``.
    """
    eps = check_epsilon(eps, upper=1.0, inclusive=True)
    losses = _loss_series(sample, weights)
    s = losses.size
    rank = max(int(math.ceil(s * (1.0 - eps))), 1)
    gamma = float(np.partition(losses, rank - 1)[rank - 1])
    tail = np.maximum(losses - gamma, 0.0)
    return gamma + float(tail.sum()) / (s * eps), gamma


# ---------------------------------------------------------------------------
# scenario LP models
# ---------------------------------------------------------------------------


def _tail_lp(returns: np.ndarray, eps: float, mix: MixtureSpec) -> LinearProgram:
    """Scenario LP over variables z = (x weights, u auxiliaries, gamma, theta).

    minimize theta subject to
        sum x = 1, x >= 0, u >= 0,
        gamma + (1 / (S_j eps)) * sum_{i in block j} u_i <= theta   per block j,
        u_i >= -r_i' x - gamma                                       per row i.
    """
    s, n = returns.shape
    n_vars = n + s + 2
    i_gamma, i_theta = n + s, n + s + 1

    objective = np.zeros(n_vars)
    objective[i_theta] = 1.0

    eq = np.zeros((1, n_vars))
    eq[0, :n] = 1.0

    ineq = np.zeros((mix.l + s, n_vars))
    rhs = np.zeros(mix.l + s)
    for j, block in enumerate(mix.slices()):
        size = mix.block_sizes[j]
        ineq[j, n + block.start:n + block.stop] = 1.0 / (size * eps)
        ineq[j, i_gamma] = 1.0
        ineq[j, i_theta] = -1.0
    ineq[mix.l:, :n] = -returns
    ineq[mix.l + np.arange(s), n + np.arange(s)] = -1.0
    ineq[mix.l:, i_gamma] = -1.0

    lower = np.zeros(n_vars)
    lower[i_gamma] = -np.inf
    lower[i_theta] = -np.inf

    return LinearProgram(objective=objective, eq_lhs=eq, eq_rhs=np.ones(1),
                         ineq_lhs=ineq, ineq_rhs=rhs, lower=lower)


def _portfolio_from_lp(solution: Solution, n_assets: int, model: str,
                       eps: float) -> Portfolio:
    z = solution.point
    weights = np.maximum(z[:n_assets], 0.0)
    weights /= weights.sum()
    return Portfolio(
        weights=weights,
        objective_value=float(solution.value),
        model=model,
        epsilon=eps,
        gamma=float(z[-2]),
        iterations=solution.iterations,
        kkt_residual=solution.kkt_residual,
    )


def minimize_cvar(sample, eps: float) -> Portfolio:
    """Scenario-LP minimization of the eps-tail expected loss."""
    eps = check_epsilon(eps, upper=1.0, inclusive=True)
    returns = check_returns_matrix(getattr(sample, "returns", sample))
    mix = MixtureSpec(l=1, block_sizes=(returns.shape[0],))
    solution = solve_lp(_tail_lp(returns, eps, mix))
    if solution.status != STATUS_OPTIMAL:
        # the program is feasible by construction, so this is an assembly bug
        raise SolverError(f"CVaR LP unexpectedly {solution.status} at eps={eps:g}")
    return _portfolio_from_lp(solution, returns.shape[1], MODEL_CVAR, eps)


def minimize_wcvar(sample, eps: float, mix: MixtureSpec) -> Portfolio:
    """Worst-case CVaR over the mixture of per-block empirical distributions.

    With ``l=1`` this is exactly the base CVaR program.
    """
    eps = check_epsilon(eps, upper=1.0, inclusive=True)
    returns = check_returns_matrix(getattr(sample, "returns", sample))
    if mix.n_samples != returns.shape[0]:
        raise ValueError(
            f"mixture blocks cover {mix.n_samples} rows, sample has {returns.shape[0]}"
        )
    solution = solve_lp(_tail_lp(returns, eps, mix))
    if solution.status != STATUS_OPTIMAL:
        raise SolverError(f"WCVaR LP unexpectedly {solution.status} at eps={eps:g}")
    return _portfolio_from_lp(solution, returns.shape[1], MODEL_WCVAR, eps)
