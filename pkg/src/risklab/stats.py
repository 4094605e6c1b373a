"""Moment estimation, bootstrap uncertainty bounds, and scenario simulation.

Randomness policy: every stochastic routine takes an explicit 64-bit seed
and draws from a counter-based Philox generator (`numpy.random.Philox`
through `numpy.random.SeedSequence`), whose bit stream is platform
independent. Normal deviates come from numpy's ziggurat sampler. Same seed,
same bytes, on every machine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_returns_matrix, check_symmetric

PSD_EIGENVALUE_FLOOR = 1e-12
_MVN_JITTER_MAX = 1e-6


@dataclass(frozen=True)
class MomentEstimate:
    """Sample mean vector and (unbiased) sample covariance of returns."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).ravel()
        cov = check_symmetric(self.cov, tol=1e-12, name="cov")
        if cov.shape[0] != mean.size:
            raise ValueError(
                f"mean has {mean.size} entries but cov is {cov.shape[0]}x{cov.shape[1]}"
            )
        if np.diag(cov).min() < -1e-12:
            raise ValueError("cov has a negative diagonal entry")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_assets(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class UncertaintyBounds:
    """Bootstrap bounds feeding the worst-case mean/covariance objective.

    ``mean_lower`` is a componentwise lower bound on the mean estimate and
    ``cov_upper_raw`` a componentwise upper bound on the covariance; both are
    clipped so they dominate the point estimates they were built from.
    ``cov_upper_psd`` is the eigenvalue-clipped PSD repair of the raw bound,
    which elementwise quantiles do not preserve.
    """

    mean_lower: np.ndarray
    cov_upper_raw: np.ndarray = field(repr=False)
    cov_upper_psd: np.ndarray = field(repr=False)
    confidence: float
    resamples: int

    def __post_init__(self):
        if not 0.0 < self.confidence < 1.0:
            raise ValueError(f"confidence must be in (0, 1), got {self.confidence}")
        if self.resamples < 1:
            raise ValueError("resamples must be positive")


def estimate_moments(sample) -> MomentEstimate:
    """Column means and unbiased (T-1 divisor) covariance of a return panel.

    Accepts a ReturnSample or a bare T x N matrix; requires T >= 2. The
    covariance is symmetrized by averaging with its transpose.
    """
    returns = check_returns_matrix(getattr(sample, "returns", sample), min_rows=2)
    t = returns.shape[0]
    mean = returns.mean(axis=0)
    centered = returns - mean
    cov = centered.T @ centered / (t - 1)
    cov = 0.5 * (cov + cov.T)
    return MomentEstimate(mean=mean, cov=cov)


def psd_repair(m) -> np.ndarray:
    """Project a symmetric matrix onto the PSD cone by eigenvalue clipping.

    Eigenvalues below zero are raised to ``1e-12``; nonnegative eigenvalues
    are untouched, so a matrix that is already PSD comes back unchanged (to
    reconstruction roundoff). This is the nearest-PSD projection in
    Frobenius norm, up to the tiny clipping floor.
    """
    m = check_symmetric(m, tol=1e-8, name="m")
    m = 0.5 * (m + m.T)
    try:
        eigvals, eigvecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"eigendecomposition failed: {exc}") from exc
    clipped = np.where(eigvals < 0.0, PSD_EIGENVALUE_FLOOR, eigvals)
    repaired = (eigvecs * clipped) @ eigvecs.T
    return 0.5 * (repaired + repaired.T)


def _resample_indices(n_rows: int, resamples: int, seed: int) -> np.ndarray:
    """Draw the (B, T) bootstrap index matrix up front from one Philox stream.

    Fixing all indices before any statistics are computed makes the per-
    resample work a pure function of (seed, resample index), so resamples can
    be processed in any order or in parallel without changing the result.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    return rng.integers(0, n_rows, size=(resamples, n_rows))


def bootstrap_bounds(sample, confidence: float = 0.95, resamples: int = 1000,
                     seed: int = 0) -> UncertaintyBounds:
    """Non-parametric bootstrap bounds for the mean and covariance.

    Rows are resampled with replacement ``resamples`` times; for each
    resample the mean vector and unbiased covariance are recorded. The lower
    mean bound is the componentwise ``1 - confidence`` nearest-rank quantile
    of the resampled means, and the raw upper covariance bound the
    ``confidence`` quantile of the resampled covariances. Both are clipped
    against the point estimates so the dominance invariants
    (``mean_lower <= mean``, ``cov_upper_raw >= cov`` componentwise) hold for
    any sample and seed. Deterministic given the seed.
    """
    if not 0.5 < confidence < 1.0:
        raise ValueError(f"confidence must be in (0.5, 1), got {confidence}")
    if resamples < 100:
        raise ValueError(f"resamples must be >= 100, got {resamples}")
    returns = check_returns_matrix(getattr(sample, "returns", sample), min_rows=2)
    t, n = returns.shape
    point = estimate_moments(returns)

    indices = _resample_indices(t, resamples, seed)
    means = np.empty((resamples, n))
    covs = np.empty((resamples, n, n))
    for b in range(resamples):
        draw = returns[indices[b]]
        mb = draw.mean(axis=0)
        centered = draw - mb
        means[b] = mb
        covs[b] = centered.T @ centered / (t - 1)

    # nearest-rank quantile: Q(p) is the ceil(p*B)-th smallest statistic
    rank_low = max(int(math.ceil((1.0 - confidence) * resamples)), 1)
    rank_high = min(int(math.ceil(confidence * resamples)), resamples)
    means.sort(axis=0)
    covs.sort(axis=0)
    mean_lower = np.minimum(means[rank_low - 1], point.mean)
    cov_upper = np.maximum(covs[rank_high - 1], point.cov)
    cov_upper = 0.5 * (cov_upper + cov_upper.T)

    return UncertaintyBounds(
        mean_lower=mean_lower,
        cov_upper_raw=cov_upper,
        cov_upper_psd=psd_repair(cov_upper),
        confidence=confidence,
        resamples=resamples,
    )


def simulate_mvn(moments: MomentEstimate, samples: int, seed: int = 0,
                 assets=None):
    """Draw i.i.d. multivariate-normal return rows with the given moments.

    The covariance is Cholesky-factorized with a jitter ridge escalating by
    decades from 1e-12 (after first trying none) until the factorization
    succeeds; rows get synthetic date labels. Deterministic given the seed.
    """
    from .data import ReturnSample

    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    n = moments.n_assets
    cov = moments.cov

    factor = None
    jitter = 0.0
    while True:
        try:
            factor = np.linalg.cholesky(cov + jitter * np.eye(n))
            break
        except np.linalg.LinAlgError:
            jitter = 1e-12 if jitter == 0.0 else jitter * 10.0
            if jitter > _MVN_JITTER_MAX:
                raise ValueError(
                    f"covariance not factorizable with jitter up to {_MVN_JITTER_MAX}"
                ) from None

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    draws = moments.mean + rng.standard_normal((samples, n)) @ factor.T

    if assets is None:
        assets = tuple(f"sim{j}" for j in range(n))
    dates = tuple(f"sim-{i + 1:06d}" for i in range(samples))
    return ReturnSample(assets=tuple(assets), dates=dates, returns=draws)


def inverse_normal_cdf(p: float) -> float:
    """Standard normal quantile via Acklam's rational approximation.

    One Halley correction step against the erfc-based CDF brings the
    absolute error to machine precision, far inside the 1e-9 contract.
    """
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")

    a = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
         1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
    b = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
         6.680131188771972e+01, -1.328068155288572e+01)
    c = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
         -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
    d = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
         3.754408661907416e+00)

    p_low = 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        z = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    elif p <= 1.0 - p_low:
        q = p - 0.5
        r = q * q
        z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        z = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)

    # Halley refinement: e = Phi(z) - p, u = e / phi(z)
    e = 0.5 * math.erfc(-z / math.sqrt(2.0)) - p
    u = e * math.sqrt(2.0 * math.pi) * math.exp(0.5 * z * z)
    return z - u / (1.0 + 0.5 * z * u)
