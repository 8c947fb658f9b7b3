"""Closed-form proximal maps used by the alternating solver.

Two operators: weighted singular value thresholding, the exact minimizer of

    lam * sum_i w_i sigma_i(Z) + 0.5 * ||Z - Y||_F^2

for nonnegative non-decreasing weights w, and weighted element-wise
shrinkage, the exact minimizer of the separable problem

    lam * sum_ij W_ij |Z_ij| + 0.5 * ||Z - Y||_F^2.

Both are pure functions and safe for concurrent invocation.
"""

from __future__ import annotations

import numpy as np

from .matrix import as_matrix, svd

__all__ = ["prox_weighted_svt", "prox_weighted_shrink"]

# slack for validating the non-decreasing weight order; covers pow() rounding
_ORDER_SLACK = 1e-12


def _check_lambda(lam) -> float:
    lam = float(lam)
    if not np.isfinite(lam) or lam <= 0.0:
        raise ValueError(f"lambda must be a positive finite real, got {lam}")
    return lam


def _check_weight_vector(weights, expected_len: int) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] != expected_len:
        raise ValueError(
            f"weight vector must have length min(m, n) = {expected_len}, "
            f"got shape {w.shape}"
        )
    if not np.all(np.isfinite(w)) or np.any(w < 0.0):
        raise ValueError("weights must be finite and nonnegative")
    if w.shape[0] > 1:
        slack = _ORDER_SLACK * max(1.0, float(w[-1]))
        if np.any(np.diff(w) < -slack):
            raise ValueError("weight vector must be non-decreasing")
    return w


def _check_weight_matrix(weights, shape) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != shape:
        raise ValueError(f"weight matrix shape {w.shape} does not match {shape}")
    if not np.all(np.isfinite(w)) or np.any(w < 0.0):
        raise ValueError("weights must be finite and nonnegative")
    return w


def _weighted_svt(y: np.ndarray, weights: np.ndarray, lam: float):
    """Threshold the spectrum of ``y``; also return the surviving singular values.

    The returned singular values are sorted non-increasing: the input spectrum
    is non-increasing and the weights are non-decreasing, so the thresholded
    sequence stays ordered.
    """
    factors = svd(y)
    shrunk = np.maximum(factors.singular_values - lam * weights, 0.0)
    return (factors.u * shrunk) @ factors.vt, shrunk


def prox_weighted_svt(y, weights, lam) -> np.ndarray:
    """Weighted singular value thresholding.

    Computes U S V^T where y = U Sigma V^T and S_ii = max(Sigma_ii - lam*w_i, 0).
    ``weights`` must be nonnegative, non-decreasing, of length min(m, n); a
    decreasing vector is rejected rather than re-sorted, because it means the
    caller produced ill-ordered thresholds.
    """
    y = as_matrix(y, "y")
    lam = _check_lambda(lam)
    w = _check_weight_vector(weights, min(y.shape))
    out, _ = _weighted_svt(y, w, lam)
    return out


def prox_weighted_shrink(y, weights, lam) -> np.ndarray:
    """Weighted element-wise shrinkage.

    Per entry: y - lam*w where y > lam*w, y + lam*w where y < -lam*w,
    and 0 otherwise.
    """
    y = as_matrix(y, "y")
    lam = _check_lambda(lam)
    w = _check_weight_matrix(weights, y.shape)
    return np.sign(y) * np.maximum(np.abs(y) - lam * w, 0.0)
