"""Synthetic low-rank + sparse problems, recovery metrics, and sweep runner.

A problem instance is X = L + S + noise with L = U V^T (n-by-r Gaussian
factors), S Bernoulli-sparse with uniform values on an interval, and
i.i.d. Gaussian noise. Sweeps re-run the solver over a grid of one axis
(rank, size, noise, or the penalty exponents) with several trials per
grid value and report averaged metrics.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .matrix import (
    NumericError,
    SPARSITY_TOL,
    as_matrix,
    frob_norm,
    rank_estimate,
    svd,
)
from .solver import SolverConfig, SolverResult, solve

__all__ = [
    "SyntheticSpec",
    "SyntheticProblem",
    "RecoveryMetrics",
    "SweepRow",
    "SWEEP_AXES",
    "SWEEP_CSV_HEADER",
    "generate",
    "evaluate",
    "run_sweep",
    "write_sweep_csv",
]

SWEEP_AXES = ("rank", "size", "noise", "pq")

SWEEP_CSV_HEADER = (
    "axis_value,trial_count,rse_l_mean,rse_l_std,rse_s_mean,rse_s_std,"
    "rank_mean,sparsity_mean,support_acc_mean,wall_ms_mean"
)


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of one synthetic problem family (square n-by-n instances)."""

    n: int
    r: int
    rho_s: float = 0.2
    noise_sigma: float = 0.01
    sparse_low: float = -5.0
    sparse_high: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 1 <= self.r <= self.n:
            raise ValueError(f"r must lie in [1, n={self.n}], got {self.r}")
        if not 0.0 < self.rho_s < 1.0:
            raise ValueError(f"rho_s must lie in (0, 1), got {self.rho_s}")
        if self.noise_sigma < 0.0:
            raise ValueError(
                f"noise_sigma must be nonnegative, got {self.noise_sigma}"
            )
        if not self.sparse_low < self.sparse_high:
            raise ValueError(
                f"need sparse_low < sparse_high, got "
                f"[{self.sparse_low}, {self.sparse_high}]"
            )


@dataclass(frozen=True)
class SyntheticProblem:
    """Ground truth plus the observation handed to the solver."""

    x_observed: np.ndarray
    l_true: np.ndarray
    s_true: np.ndarray
    noise: np.ndarray
    spec: SyntheticSpec


@dataclass(frozen=True)
class RecoveryMetrics:
    """How well a decomposition matches a ground-truth problem.

    ``rse_l``/``rse_s`` are relative errors ||A - A*||_F / ||A||_F; when the
    true factor is identically zero the ratio is undefined, the absolute
    error is reported instead and the matching ``*_is_absolute`` flag is set.
    """

    rse_l: float
    rse_s: float
    rank_recovered: int
    sparsity_count: int
    support_accuracy: float
    rse_l_is_absolute: bool = False
    rse_s_is_absolute: bool = False


def generate(spec: SyntheticSpec) -> SyntheticProblem:
    """Draw one seeded problem instance.

    The draw order (low-rank factors, sparse mask, sparse values, noise) is
    fixed, and the noise is a scaled standard-normal draw, so instances with
    the same seed but different noise_sigma share L and S exactly.
    """
    rng = np.random.default_rng(spec.seed)
    n, r = spec.n, spec.r
    u = rng.standard_normal((n, r))
    v = rng.standard_normal((n, r))
    l_true = u @ v.T
    mask = rng.random((n, n)) < spec.rho_s
    values = rng.uniform(spec.sparse_low, spec.sparse_high, size=(n, n))
    s_true = np.where(mask, values, 0.0)
    noise = spec.noise_sigma * rng.standard_normal((n, n))
    return SyntheticProblem(
        x_observed=l_true + s_true + noise,
        l_true=l_true,
        s_true=s_true,
        noise=noise,
        spec=spec,
    )


def _relative_error(recovered: np.ndarray, truth: np.ndarray):
    err = float(np.linalg.norm(recovered - truth))
    denom = float(np.linalg.norm(truth))
    if denom == 0.0:
        return err, True
    return err / denom, False


def evaluate(result: SolverResult, truth: SyntheticProblem) -> RecoveryMetrics:
    """Score a solver result against the generating problem."""
    l_star = as_matrix(result.l_star, "l_star")
    s_star = as_matrix(result.s_star, "s_star")
    if l_star.shape != truth.l_true.shape or s_star.shape != truth.s_true.shape:
        raise ValueError("result shape does not match the generated problem")
    rse_l, l_abs = _relative_error(l_star, truth.l_true)
    rse_s, s_abs = _relative_error(s_star, truth.s_true)
    recovered_support = np.abs(s_star) > SPARSITY_TOL
    true_support = np.abs(truth.s_true) > SPARSITY_TOL
    return RecoveryMetrics(
        rse_l=rse_l,
        rse_s=rse_s,
        rank_recovered=rank_estimate(svd(l_star).singular_values),
        sparsity_count=int(np.count_nonzero(recovered_support)),
        support_accuracy=float(np.mean(recovered_support == true_support)),
        rse_l_is_absolute=l_abs,
        rse_s_is_absolute=s_abs,
    )


@dataclass(frozen=True)
class SweepRow:
    """Averaged metrics for one grid value of a sweep."""

    axis_value: float
    trial_count: int
    failures: int
    rse_l_mean: float
    rse_l_std: float
    rse_s_mean: float
    rse_s_std: float
    rank_mean: float
    sparsity_mean: float
    support_acc_mean: float
    wall_ms_mean: float


def _apply_axis(axis: str, value: float, spec: SyntheticSpec, cfg: SolverConfig):
    if axis == "rank":
        return replace(spec, r=int(value)), cfg
    if axis == "size":
        return replace(spec, n=int(value)), cfg
    if axis == "noise":
        return replace(spec, noise_sigma=float(value)), cfg
    if axis == "pq":
        return spec, cfg.with_overrides(p=float(value), q=float(value))
    raise ValueError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")


def _trial_seeds(base_seed: int, trials: int) -> list[int]:
    # same seeds for every axis value, so grid values see matched instances
    return [base_seed + i for i in range(trials)]


def _run_trial(spec: SyntheticSpec, cfg: SolverConfig):
    problem = generate(spec)
    start = time.perf_counter()
    result = solve(problem.x_observed, cfg)
    wall_ms = (time.perf_counter() - start) * 1e3
    return evaluate(result, problem), wall_ms


def max_trial_workers(explicit: int | None = None) -> int:
    """Trial parallelism cap: explicit argument, else PQPCP_THREADS, else 1."""
    if explicit is not None:
        if explicit < 1:
            raise ValueError(f"max_workers must be >= 1, got {explicit}")
        return explicit
    raw = os.environ.get("PQPCP_THREADS", "").strip()
    if not raw:
        return 1
    try:
        value = int(raw, 10)
    except ValueError:
        raise ValueError(f"PQPCP_THREADS must be an integer, got {raw!r}")
    return max(1, value)


def run_sweep(
    axis: str,
    values,
    base: SyntheticSpec,
    cfg: SolverConfig,
    trials: int,
    max_workers: int | None = None,
) -> list[SweepRow]:
    """Solve ``trials`` seeded instances per grid value and average the metrics.

    Rows come back in input order. A numeric failure inside one trial is
    counted in the row's ``failures`` and the remaining trials still
    contribute; ``trial_count`` is the number of successful trials.
    """
    values = list(values)
    if not values:
        raise ValueError("values must be nonempty")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    workers = max_trial_workers(max_workers)
    seeds = _trial_seeds(base.seed, trials)

    tasks = []
    for value in values:
        spec_v, cfg_v = _apply_axis(axis, value, base, cfg)
        for seed in seeds:
            tasks.append((replace(spec_v, seed=seed), cfg_v))

    def run(task):
        spec_t, cfg_t = task
        try:
            return _run_trial(spec_t, cfg_t)
        except NumericError:
            return None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, tasks))
    else:
        outcomes = [run(task) for task in tasks]

    rows = []
    for i, value in enumerate(values):
        chunk = outcomes[i * trials:(i + 1) * trials]
        good = [o for o in chunk if o is not None]
        failures = trials - len(good)
        if good:
            metrics = [m for m, _ in good]
            walls = np.array([ms for _, ms in good])
            rse_l = np.array([m.rse_l for m in metrics])
            rse_s = np.array([m.rse_s for m in metrics])
            row = SweepRow(
                axis_value=float(value),
                trial_count=len(good),
                failures=failures,
                rse_l_mean=float(rse_l.mean()),
                rse_l_std=float(rse_l.std()),
                rse_s_mean=float(rse_s.mean()),
                rse_s_std=float(rse_s.std()),
                rank_mean=float(np.mean([m.rank_recovered for m in metrics])),
                sparsity_mean=float(np.mean([m.sparsity_count for m in metrics])),
                support_acc_mean=float(
                    np.mean([m.support_accuracy for m in metrics])
                ),
                wall_ms_mean=float(walls.mean()),
            )
        else:
            nan = float("nan")
            row = SweepRow(
                axis_value=float(value), trial_count=0, failures=failures,
                rse_l_mean=nan, rse_l_std=nan, rse_s_mean=nan, rse_s_std=nan,
                rank_mean=nan, sparsity_mean=nan, support_acc_mean=nan,
                wall_ms_mean=nan,
            )
        rows.append(row)
    return rows


def write_sweep_csv(rows, path, include_timing: bool = True) -> None:
    """Write sweep rows as CSV.

    ``include_timing=False`` zeroes the wall-clock column so that repeated
    runs with the same seed produce byte-identical files.
    """
    lines = [SWEEP_CSV_HEADER]
    for row in rows:
        wall = row.wall_ms_mean if include_timing else 0.0
        lines.append(
            ",".join(
                str(v)
                for v in (
                    row.axis_value, row.trial_count,
                    row.rse_l_mean, row.rse_l_std,
                    row.rse_s_mean, row.rse_s_std,
                    row.rank_mean, row.sparsity_mean, row.support_acc_mean,
                    wall,
                )
            )
        )
    payload = ("\n".join(lines) + "\n").encode("ascii")
    from .matrix import _atomic_write_bytes

    _atomic_write_bytes(path, payload)
