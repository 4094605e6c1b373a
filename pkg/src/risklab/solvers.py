"""Numerical engines: a simplex-constrained cone minimizer and a dense LP front-end.

``solve_simplex_cone`` minimizes ``kappa * sqrt(x' S x) - m' x`` over the unit
simplex with an away-step Frank-Wolfe loop (exact line search; the linear
subproblem over the simplex is just an argmin over coordinates) accelerated
by an active-set Newton polish. Optimality is certified by the Frank-Wolfe
duality gap, which for a convex objective upper-bounds the suboptimality:

    gap(x) = g(x)' x - min_j g(x)_j,   g = gradient.

``solve_lp`` solves dense linear programs through scipy's HiGHS backend and
re-verifies feasibility and the duality gap before reporting success.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from ._validation import as_float_vector, check_symmetric
from .exceptions import SolverError

SMOOTHING_DELTA = 1e-10
DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITERS = 20000

STATUS_OPTIMAL = "optimal"
STATUS_ITERATION_LIMIT = "iteration_limit"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class SimplexProblem:
    """min kappa * sqrt(x' cov x) - mean' x  over  {x >= 0, sum x = 1}."""

    kappa: float
    cov: np.ndarray = field(repr=False)
    mean: np.ndarray
    tol: float = DEFAULT_TOL
    max_iters: int = DEFAULT_MAX_ITERS

    def __post_init__(self):
        if not self.kappa > 0.0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        cov = check_symmetric(self.cov, tol=1e-8, name="cov")
        mean = as_float_vector(self.mean, "mean")
        if cov.shape[0] != mean.size:
            raise ValueError("cov and mean dimensions disagree")
        eigmin = float(np.linalg.eigvalsh(cov).min())
        if eigmin < -1e-10:
            raise ValueError(f"cov is not PSD (min eigenvalue {eigmin:.3g})")
        if self.tol <= 0.0 or self.max_iters < 1:
            raise ValueError("tol must be > 0 and max_iters >= 1")
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "mean", mean)


@dataclass(frozen=True)
class LinearProgram:
    """Dense LP: min c'z  s.t.  eq_lhs z = eq_rhs, ineq_lhs z <= ineq_rhs, z >= lower.

    Lower-bound entries may be ``-inf`` (free below); everything else must be
    finite.
    """

    objective: np.ndarray
    eq_lhs: np.ndarray = field(repr=False)
    eq_rhs: np.ndarray
    ineq_lhs: np.ndarray = field(repr=False)
    ineq_rhs: np.ndarray
    lower: np.ndarray

    def __post_init__(self):
        c = as_float_vector(self.objective, "objective")
        n = c.size

        def norm_block(lhs, rhs, label):
            lhs = np.zeros((0, n)) if lhs is None else np.atleast_2d(np.asarray(lhs, dtype=float))
            rhs = np.zeros(0) if rhs is None else np.asarray(rhs, dtype=float).ravel()
            if lhs.shape[0] != rhs.size or (lhs.size and lhs.shape[1] != n):
                raise ValueError(f"{label} dimensions inconsistent with {n} variables")
            if not (np.all(np.isfinite(lhs)) and np.all(np.isfinite(rhs))):
                raise ValueError(f"{label} contains non-finite entries")
            return lhs, rhs

        eq_lhs, eq_rhs = norm_block(self.eq_lhs, self.eq_rhs, "equality block")
        ineq_lhs, ineq_rhs = norm_block(self.ineq_lhs, self.ineq_rhs, "inequality block")
        lower = np.asarray(self.lower, dtype=float).ravel()
        if lower.size != n:
            raise ValueError(f"lower bounds have length {lower.size}, expected {n}")
        if np.any(np.isnan(lower)) or np.any(lower == np.inf):
            raise ValueError("lower bounds must be finite or -inf")
        for name, val in (("objective", c), ("eq_lhs", eq_lhs), ("eq_rhs", eq_rhs),
                          ("ineq_lhs", ineq_lhs), ("ineq_rhs", ineq_rhs), ("lower", lower)):
            object.__setattr__(self, name, val)

    @property
    def n_vars(self) -> int:
        return self.objective.size


@dataclass(frozen=True)
class Solution:
    """Solver outcome. ``point`` is None when no iterate is available."""

    point: np.ndarray | None
    value: float
    status: str
    iterations: int
    kkt_residual: float


# ---------------------------------------------------------------------------
# cone solver
# ---------------------------------------------------------------------------


def _cone_terms(x, cov, mean, kappa, delta2):
    """Objective value, gradient, cov @ x, and the smoothed norm at x."""
    p = cov @ x
    q = max(float(x @ p), 0.0)
    s = math.sqrt(q + delta2)
    f = kappa * s - float(mean @ x)
    g = (kappa / s) * p - mean
    return f, g, p, q, s


def _segment_minimizer(kappa, q0, b, a, m, delta2, gamma_max):
    """Exact minimizer of gamma -> kappa*sqrt(q0 + b*g + a*g^2 + d2) - m*g on [0, gmax].

    The derivative is monotone (the objective is convex along any segment),
    so bisection on its sign is exact to roundoff.
    """

    def deriv(gamma):
        q = q0 + gamma * (b + gamma * a)
        s = math.sqrt(max(q, 0.0) + delta2)
        return 0.5 * kappa * (b + 2.0 * a * gamma) / s - m

    if deriv(0.0) >= 0.0:
        return 0.0
    if deriv(gamma_max) <= 0.0:
        return gamma_max
    lo, hi = 0.0, gamma_max
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if deriv(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _active_set_polish(x0, cov, mean, kappa, delta2, tol, max_rounds=40):
    """Newton refinement on the current support, growing it as duals demand.

    Returns (x, newton_steps, reached_tol). Falls back cheaply: any failure
    just reports ``reached_tol=False`` and the caller resumes Frank-Wolfe.
    """
    n = mean.size
    x = np.array(x0, dtype=float)
    active = x > 1e-12
    if not active.any():
        active[int(np.argmax(x))] = True
    x[~active] = 0.0
    x /= x.sum()
    steps = 0

    for _ in range(max_rounds):
        stalled = False
        for _ in range(60):
            idx = np.flatnonzero(active)
            if idx.size < 2:
                break
            f0, g, p, q, s = _cone_terms(x, cov, mean, kappa, delta2)
            g_active = g[idx]
            hess = (kappa / s) * (
                cov[np.ix_(idx, idx)] - np.outer(p[idx], p[idx]) / (s * s)
            )
            k = idx.size
            ridge = 1e-12 * (1.0 + abs(np.trace(hess)) / k)
            kkt = np.zeros((k + 1, k + 1))
            kkt[:k, :k] = hess + ridge * np.eye(k)
            kkt[:k, k] = 1.0
            kkt[k, :k] = 1.0
            rhs = np.zeros(k + 1)
            rhs[:k] = -g_active
            try:
                step = np.linalg.solve(kkt, rhs)[:k]
            except np.linalg.LinAlgError:
                stalled = True
                break
            if not np.all(np.isfinite(step)):
                stalled = True
                break
            if np.abs(step).max() <= 1e-15:
                break

            alpha = 1.0
            shrinking = step < 0.0
            if shrinking.any():
                alpha = min(1.0, float(np.min(x[idx][shrinking] / -step[shrinking])))
            accepted = False
            for _ in range(50):
                trial = x.copy()
                trial[idx] = np.maximum(x[idx] + alpha * step, 0.0)
                total = trial.sum()
                if total <= 0.0:
                    alpha *= 0.5
                    continue
                trial /= total
                f_trial = _cone_terms(trial, cov, mean, kappa, delta2)[0]
                if f_trial < f0 or (f_trial == f0 and alpha == 1.0):
                    x = trial
                    accepted = True
                    break
                alpha *= 0.5
                if alpha < 1e-18:
                    break
            steps += 1
            if not accepted:
                stalled = True
                break
            active = x > 1e-14

        _, g, _, _, _ = _cone_terms(x, cov, mean, kappa, delta2)
        gap = float(g @ x - g.min())
        if gap <= tol:
            return x, steps, True
        if stalled:
            return x, steps, False
        entering = int(np.argmin(g))
        if active[entering]:
            # support already holds the most promising coordinate: Newton
            # cannot make further progress, hand control back
            return x, steps, False
        active[entering] = True

    return x, steps, False


def solve_simplex_cone(problem: SimplexProblem) -> Solution:
    """Minimize the risk-factor cone objective over the unit simplex.

    Away-step Frank-Wolfe with exact line search drives global progress;
    every few hundred iterations an active-set Newton polish is attempted,
    which normally lands the duality gap well below ``tol`` in a handful of
    steps. ``kkt_residual`` reports the final Frank-Wolfe gap, a certified
    bound on the suboptimality of the returned point. Deterministic: no
    randomness, ties broken by lowest index.
    """
    cov, mean, kappa = problem.cov, problem.mean, problem.kappa
    tol, max_iters = problem.tol, problem.max_iters
    n = mean.size
    delta2 = SMOOTHING_DELTA * SMOOTHING_DELTA

    x = np.full(n, 1.0 / n)
    best_x = x.copy()
    best_f = math.inf
    best_gap = math.inf
    iterations = 0
    next_polish = min(200, max_iters)

    while True:
        f, g, p, q, s = _cone_terms(x, cov, mean, kappa, delta2)
        gap = float(g @ x - g.min())
        if f < best_f:
            best_f, best_x, best_gap = f, x.copy(), gap

        if gap <= tol:
            return Solution(point=x, value=f, status=STATUS_OPTIMAL,
                            iterations=iterations, kkt_residual=gap)
        if iterations >= max_iters:
            return Solution(point=best_x, value=best_f, status=STATUS_ITERATION_LIMIT,
                            iterations=iterations, kkt_residual=best_gap)

        if iterations >= next_polish:
            polished, steps, done = _active_set_polish(
                x, cov, mean, kappa, delta2, tol
            )
            iterations += max(steps, 1)
            f_polished = _cone_terms(polished, cov, mean, kappa, delta2)[0]
            if f_polished <= f:
                x = polished
            next_polish = iterations + 200
            if done or f_polished <= f:
                continue

        # direction selection: plain Frank-Wolfe step toward the best vertex,
        # or an away step reducing the worst in-support coordinate
        j_fw = int(np.argmin(g))
        gx = float(g @ x)
        support = np.flatnonzero(x > 0.0)
        j_aw = int(support[np.argmax(g[support])])
        fw_slope = g[j_fw] - gx
        aw_slope = gx - g[j_aw]
        use_fw = fw_slope <= aw_slope or x[j_aw] >= 1.0 - 1e-14
        if use_fw:
            d = -x.copy()
            d[j_fw] += 1.0
            gamma_max = 1.0
        else:
            d = x.copy()
            d[j_aw] -= 1.0
            gamma_max = x[j_aw] / (1.0 - x[j_aw])

        a = float(d @ (cov @ d))
        b = 2.0 * float(p @ d)
        m = float(mean @ d)
        gamma = _segment_minimizer(kappa, q, b, a, m, delta2, gamma_max)
        iterations += 1
        if gamma <= 0.0:
            # numerically flat direction; force a polish attempt next round
            next_polish = iterations
            continue
        x = x + gamma * d
        np.maximum(x, 0.0, out=x)
        x /= x.sum()


# ---------------------------------------------------------------------------
# linear programming
# ---------------------------------------------------------------------------

_HIGHS_STATUS = {
    0: STATUS_OPTIMAL,
    1: STATUS_ITERATION_LIMIT,
    2: STATUS_INFEASIBLE,
    3: STATUS_UNBOUNDED,
}

_LP_FEASIBILITY_TOL = 1e-8
_LP_GAP_TOL = 1e-7


def _lp_feasibility(lp: LinearProgram, z: np.ndarray) -> float:
    """Worst absolute violation of the LP's constraints at z."""
    worst = 0.0
    if lp.eq_lhs.shape[0]:
        worst = max(worst, float(np.abs(lp.eq_lhs @ z - lp.eq_rhs).max()))
    if lp.ineq_lhs.shape[0]:
        worst = max(worst, float(np.maximum(lp.ineq_lhs @ z - lp.ineq_rhs, 0.0).max()))
    finite = np.isfinite(lp.lower)
    if finite.any():
        worst = max(worst, float(np.maximum(lp.lower[finite] - z[finite], 0.0).max()))
    return worst


def _duality_gap(lp: LinearProgram, res) -> float:
    """Relative primal-dual objective gap from the HiGHS marginals."""
    try:
        dual = 0.0
        if lp.ineq_lhs.shape[0]:
            dual += float(res.ineqlin.marginals @ lp.ineq_rhs)
        if lp.eq_lhs.shape[0]:
            dual += float(res.eqlin.marginals @ lp.eq_rhs)
        finite = np.isfinite(lp.lower)
        if finite.any():
            dual += float(res.lower.marginals[finite] @ lp.lower[finite])
    except (AttributeError, TypeError):
        return 0.0
    return abs(float(res.fun) - dual) / (1.0 + abs(float(res.fun)))


def solve_lp(lp: LinearProgram) -> Solution:
    """Solve a dense LP; statuses are explicit, never silent.

    Backed by scipy's HiGHS interface (single-threaded, deterministic for a
    fixed input). Optimal solutions are re-verified: primal feasibility within
    1e-8 and relative duality gap within 1e-7, else a SolverError is raised.
    """
    bounds = [(low if math.isfinite(low) else None, None) for low in lp.lower]
    res = linprog(
        c=lp.objective,
        A_ub=lp.ineq_lhs if lp.ineq_lhs.shape[0] else None,
        b_ub=lp.ineq_rhs if lp.ineq_rhs.size else None,
        A_eq=lp.eq_lhs if lp.eq_lhs.shape[0] else None,
        b_eq=lp.eq_rhs if lp.eq_rhs.size else None,
        bounds=bounds,
        method="highs",
        options={
            "primal_feasibility_tolerance": 1e-9,
            "dual_feasibility_tolerance": 1e-9,
        },
    )

    status = _HIGHS_STATUS.get(res.status)
    if status is None:
        raise SolverError(f"LP solver failed: {res.message}")
    iterations = int(res.nit) if res.nit is not None else 0

    if status == STATUS_OPTIMAL:
        z = np.asarray(res.x, dtype=float)
        infeas = _lp_feasibility(lp, z)
        gap = _duality_gap(lp, res)
        if infeas > _LP_FEASIBILITY_TOL or gap > _LP_GAP_TOL:
            raise SolverError(
                f"LP solution failed verification (infeasibility {infeas:.3g}, gap {gap:.3g})"
            )
        return Solution(point=z, value=float(res.fun), status=status,
                        iterations=iterations, kkt_residual=max(infeas, gap))

    point = None if res.x is None else np.asarray(res.x, dtype=float)
    value = math.nan
    if status == STATUS_UNBOUNDED:
        value = -math.inf
    elif status == STATUS_ITERATION_LIMIT and res.fun is not None:
        value = float(res.fun)
    return Solution(point=point, value=value, status=status,
                    iterations=iterations, kkt_residual=math.inf)
