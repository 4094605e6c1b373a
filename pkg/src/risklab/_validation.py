"""Input validation helpers used by the estimators and the functional API."""

from __future__ import annotations

import numpy as np


def as_float_matrix(x, name: str = "X") -> np.ndarray:
    """Coerce to a 2-D float64 array and require every entry finite."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got ndim={arr.ndim}")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_float_vector(x, name: str = "v") -> np.ndarray:
    arr = np.asarray(x, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_returns_matrix(x, name: str = "returns", min_rows: int = 1) -> np.ndarray:
    """Validate a T x N matrix of per-period returns."""
    arr = as_float_matrix(x, name)
    if arr.shape[0] < min_rows:
        raise ValueError(
            f"{name} needs at least {min_rows} rows, got {arr.shape[0]}"
        )
    return arr


def check_weights(w, n_assets: int, name: str = "weights") -> np.ndarray:
    """Validate a portfolio weight vector: right length, near the unit simplex."""
    arr = as_float_vector(w, name)
    if arr.size != n_assets:
        raise ValueError(f"{name} has length {arr.size}, expected {n_assets}")
    if arr.min() < -1e-8:
        raise ValueError(f"{name} has a negative entry ({arr.min():.3g})")
    if abs(arr.sum() - 1.0) > 1e-6:
        raise ValueError(f"{name} must sum to 1, got {arr.sum():.8g}")
    return arr


def check_epsilon(eps: float, upper: float = 1.0, inclusive: bool = True,
                  name: str = "epsilon") -> float:
    """Validate a tail-probability parameter in (0, upper] or (0, upper)."""
    eps = float(eps)
    if not np.isfinite(eps) or eps <= 0.0:
        raise ValueError(f"{name} must be > 0, got {eps}")
    if inclusive:
        if eps > upper:
            raise ValueError(f"{name} must be <= {upper}, got {eps}")
    elif eps >= upper:
        raise ValueError(f"{name} must be < {upper}, got {eps}")
    return eps


def check_symmetric(m, tol: float = 1e-12, name: str = "matrix") -> np.ndarray:
    """Validate a square symmetric matrix (within an absolute tolerance)."""
    arr = as_float_matrix(m, name)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    scale = max(1.0, float(np.abs(arr).max()))
    if np.abs(arr - arr.T).max() > tol * scale:
        raise ValueError(f"{name} is not symmetric to tolerance {tol}")
    return arr
