"""Alternating proximal solver for low-rank + sparse decomposition.

Minimizes the smoothed objective

    lambda1 * sum_i (sigma_i(L) + eps)^p
  + lambda2 * sum_ij (|S_ij| + eps)^q
  + 0.5 * ||L + S - X||_F^2

with 0 < p, q <= 1 (p = q = 1 is the convex degenerate mode). Each
iteration linearizes both penalties at the current iterate, which turns
the two block updates into a weighted singular value thresholding and a
weighted shrinkage, both closed form; the per-singular-value and
per-entry weights are recomputed from the new iterate every round, and
the smoothing eps is annealed downward on a geometric schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .matrix import (
    NumericError,
    RANK_REL_TOL,
    SPARSITY_TOL,
    as_matrix,
    frob_norm,
    rank_estimate,
    svd,
)
from .prox import _weighted_svt, prox_weighted_shrink, prox_weighted_svt

__all__ = [
    "SolverConfig",
    "IterationRecord",
    "SolverResult",
    "compute_weights_l",
    "compute_weights_s",
    "relaxed_objective",
    "update_l",
    "update_s",
    "solve",
]


@dataclass(frozen=True)
class SolverConfig:
    """Model and algorithm parameters.

    ``lambda2=None`` resolves at solve time to lambda1 / sqrt(max(m, n)),
    the classical balance for the convex mode. ``mu1`` and ``mu2`` are the
    proximal step weights (larger means more conservative steps); the
    defaults keep every accepted step a strict majorization step, which is
    what makes the objective trace monotone.
    """

    p: float = 0.5
    q: float = 0.5
    lambda1: float = 1.0
    lambda2: float | None = None
    mu1: float = 2.1
    mu2: float = 2.1
    epsilon0: float = 1e-3
    epsilon_decay: float = 1.1
    epsilon_floor: float = 1e-12
    max_iters: int = 500
    rel_tol: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must lie in (0, 1], got {self.p}")
        if not 0.0 < self.q <= 1.0:
            raise ValueError(f"q must lie in (0, 1], got {self.q}")
        if self.lambda1 <= 0.0 or not math.isfinite(self.lambda1):
            raise ValueError(f"lambda1 must be positive, got {self.lambda1}")
        if self.lambda2 is not None and (
            self.lambda2 <= 0.0 or not math.isfinite(self.lambda2)
        ):
            raise ValueError(f"lambda2 must be positive, got {self.lambda2}")
        if self.mu1 <= 1.0:
            raise ValueError(f"mu1 must exceed 1, got {self.mu1}")
        if self.mu2 <= 0.5:
            raise ValueError(f"mu2 must exceed 1/2, got {self.mu2}")
        if self.epsilon0 <= 0.0:
            raise ValueError(f"epsilon0 must be positive, got {self.epsilon0}")
        if self.epsilon_decay <= 1.0:
            raise ValueError(
                f"epsilon_decay must exceed 1, got {self.epsilon_decay}"
            )
        if self.epsilon_floor < 0.0:
            raise ValueError(
                f"epsilon_floor must be nonnegative, got {self.epsilon_floor}"
            )
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.rel_tol <= 0.0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")

    def lambda2_for(self, shape) -> float:
        """Sparse-penalty weight, resolved against the problem shape."""
        if self.lambda2 is not None:
            return self.lambda2
        return self.lambda1 / math.sqrt(max(shape))

    def with_overrides(self, **overrides) -> "SolverConfig":
        """Copy with the given fields replaced (None values are ignored)."""
        effective = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **effective) if effective else self

    @classmethod
    def from_file(cls, path, **overrides) -> "SolverConfig":
        """Build a config from a flat ``key = number`` file.

        Every field is optional; missing keys keep their defaults. Explicit
        keyword overrides (e.g. CLI flags) win over file values.
        """
        values = _read_config_file(path)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


_CONFIG_FIELDS = {
    "p", "q", "lambda1", "lambda2", "mu1", "mu2",
    "epsilon0", "epsilon_decay", "epsilon_floor", "max_iters", "rel_tol",
}
assert _CONFIG_FIELDS == {f.name for f in fields(SolverConfig)}


def _read_config_file(path) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(
                    f"{path}:{lineno}: expected 'key = number', got {raw.strip()!r}"
                )
            key, _, text = line.partition("=")
            key, text = key.strip(), text.strip()
            if key not in _CONFIG_FIELDS:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            try:
                value = int(text, 10) if key == "max_iters" else float(text)
            except ValueError as exc:
                raise ValueError(
                    f"{path}:{lineno}: bad numeric value for {key!r}: {text!r}"
                ) from exc
            values[key] = value
    return values


@dataclass(frozen=True)
class IterationRecord:
    """Per-iteration trace entry."""

    iter: int
    relaxed_objective: float
    l_subobjective: float
    s_subobjective: float
    rank_estimate: int
    sparsity_count: int
    step_delta: float


@dataclass(frozen=True)
class SolverResult:
    """Recovered factors plus the full iteration trace."""

    l_star: np.ndarray
    s_star: np.ndarray
    trace: tuple[IterationRecord, ...]
    converged: bool
    iters_used: int


def _weights_from_sigma(sigma: np.ndarray, p: float, epsilon: float) -> np.ndarray:
    if p == 1.0:
        return np.ones_like(sigma)
    if epsilon == 0.0 and np.any(sigma == 0.0):
        raise ValueError(
            "epsilon must be positive when p < 1 and a singular value is zero"
        )
    return p / np.power(sigma + epsilon, 1.0 - p)


def _weights_from_abs(magnitudes: np.ndarray, q: float, epsilon: float) -> np.ndarray:
    if q == 1.0:
        return np.ones_like(magnitudes)
    if epsilon == 0.0 and np.any(magnitudes == 0.0):
        raise ValueError(
            "epsilon must be positive when q < 1 and an entry is zero"
        )
    return q / np.power(magnitudes + epsilon, 1.0 - q)


def compute_weights_l(l, p: float, epsilon: float) -> np.ndarray:
    """Per-singular-value weights p / (sigma_i(L) + eps)^(1-p).

    With sigma sorted non-increasing the result is non-decreasing, which is
    exactly the order the weighted thresholding operator requires.
    """
    sigma = svd(as_matrix(l, "l")).singular_values
    return _weights_from_sigma(sigma, p, epsilon)


def compute_weights_s(s, q: float, epsilon: float) -> np.ndarray:
    """Per-entry weights q / (|S_ij| + eps)^(1-q)."""
    s = as_matrix(s, "s")
    return _weights_from_abs(np.abs(s), q, epsilon)


def _check_shapes(l, s, x):
    l = as_matrix(l, "l")
    s = as_matrix(s, "s")
    x = as_matrix(x, "x")
    if l.shape != x.shape or s.shape != x.shape:
        raise ValueError(
            f"shape mismatch: l {l.shape}, s {s.shape}, x {x.shape}"
        )
    return l, s, x


def _objective_terms(sigma, s_abs, resid, lam1, lam2, p, q, epsilon):
    low_rank = lam1 * float(np.sum(np.power(sigma + epsilon, p)))
    sparse = lam2 * float(np.sum(np.power(s_abs + epsilon, q)))
    fidelity = 0.5 * float(np.sum(resid * resid))
    return low_rank + sparse + fidelity


def relaxed_objective(l, s, x, cfg: SolverConfig, epsilon: float) -> float:
    """Smoothed objective value at (l, s) for smoothing level ``epsilon``."""
    l, s, x = _check_shapes(l, s, x)
    if epsilon < 0.0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon}")
    sigma = svd(l).singular_values
    lam2 = cfg.lambda2_for(x.shape)
    return _objective_terms(
        sigma, np.abs(s), l + s - x, cfg.lambda1, lam2, cfg.p, cfg.q, epsilon
    )


def update_l(l, s, x, w, cfg: SolverConfig) -> np.ndarray:
    """One low-rank block update: weighted SVT at the gradient-step point."""
    l, s, x = _check_shapes(l, s, x)
    step_point = l - (l + s - x) / cfg.mu1
    return prox_weighted_svt(step_point, w, cfg.lambda1 / cfg.mu1)


def update_s(l, s, x, m, cfg: SolverConfig) -> np.ndarray:
    """One sparse block update: weighted shrinkage at the gradient-step point."""
    l, s, x = _check_shapes(l, s, x)
    step_point = s - (l + s - x) / cfg.mu2
    lam2 = cfg.lambda2_for(x.shape)
    return prox_weighted_shrink(step_point, m, lam2 / cfg.mu2)


def solve(x, cfg: SolverConfig | None = None, callback=None) -> SolverResult:
    """Run the full alternating loop on an observed matrix.

    Starts from L = X, S = 0 with weights derived from that starting point,
    then alternates the two block updates, refreshing the weights after each
    round and annealing the smoothing level by ``epsilon_decay`` per
    iteration (clamped at ``epsilon_floor``). Stops once the combined step
    norm ||dL||_F + ||dS||_F falls below ``rel_tol * max(1, ||X||_F)`` or
    after ``max_iters`` iterations.

    ``callback``, if given, is invoked after every iteration as
    ``callback(k, l, s, epsilon)`` with the new iterates and the smoothing
    level that produced that iteration's thresholds; it exists for
    diagnostics and convergence instrumentation.
    """
    x = as_matrix(x, "x")
    if cfg is None:
        cfg = SolverConfig()
    lam1 = cfg.lambda1
    lam2 = cfg.lambda2_for(x.shape)
    scale = max(1.0, frob_norm(x))

    low = x.copy()
    sparse = np.zeros_like(x)
    eps = cfg.epsilon0
    sigma = svd(low).singular_values
    w = _weights_from_sigma(sigma, cfg.p, eps)
    m_weights = _weights_from_abs(np.abs(sparse), cfg.q, eps)

    trace: list[IterationRecord] = []
    converged = False
    k = 0
    for k in range(1, cfg.max_iters + 1):
        resid = low + sparse - x
        try:
            low_next, sigma_next = _weighted_svt(
                low - resid / cfg.mu1, w, lam1 / cfg.mu1
            )
        except NumericError as exc:
            raise NumericError(f"iteration {k}: {exc}") from exc
        sparse_next = prox_weighted_shrink(
            sparse - resid / cfg.mu2, m_weights, lam2 / cfg.mu2
        )

        step_delta = float(
            np.linalg.norm(low_next - low) + np.linalg.norm(sparse_next - sparse)
        )
        abs_next = np.abs(sparse_next)
        trace.append(
            IterationRecord(
                iter=k,
                relaxed_objective=_objective_terms(
                    sigma_next, abs_next, low_next + sparse_next - x,
                    lam1, lam2, cfg.p, cfg.q, eps,
                ),
                l_subobjective=_objective_terms(
                    sigma_next, np.empty(0), low_next + sparse - x,
                    lam1, 0.0, cfg.p, cfg.q, eps,
                ),
                s_subobjective=_objective_terms(
                    np.empty(0), abs_next, low + sparse_next - x,
                    0.0, lam2, cfg.p, cfg.q, eps,
                ),
                rank_estimate=rank_estimate(sigma_next, RANK_REL_TOL),
                sparsity_count=int(np.count_nonzero(abs_next > SPARSITY_TOL)),
                step_delta=step_delta,
            )
        )
        if callback is not None:
            callback(k, low_next, sparse_next, eps)

        converged = step_delta / scale < cfg.rel_tol
        low, sparse = low_next, sparse_next
        eps = max(eps / cfg.epsilon_decay, cfg.epsilon_floor)
        w = _weights_from_sigma(sigma_next, cfg.p, eps)
        m_weights = _weights_from_abs(abs_next, cfg.q, eps)
        if converged:
            break

    return SolverResult(
        l_star=low,
        s_star=sparse,
        trace=tuple(trace),
        converged=converged,
        iters_used=k,
    )
