"""Dense-matrix primitives shared by the solver and the benchmarks.

Matrices are plain 2-D float64 numpy arrays throughout the package; the
helpers here pin down the conventions everything else relies on (thin SVD
with non-increasing singular values, Frobenius norms, seeded Gaussian
matrices) together with the two on-disk matrix formats used by the CLI:
CSV (one row per line) and a raw little-endian binary layout for large
fixtures.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NumericError",
    "SvdFactors",
    "as_matrix",
    "svd",
    "frob_norm",
    "randn_matrix",
    "rank_estimate",
    "load_matrix_csv",
    "save_matrix_csv",
    "load_matrix_binary",
    "save_matrix_binary",
    "load_matrix",
    "save_matrix",
]

# sigma_i counts toward the numerical rank when sigma_i > RANK_REL_TOL * sigma_1
RANK_REL_TOL = 1e-9

# |S_ij| counts as a nonzero of the sparse component above this magnitude
SPARSITY_TOL = 1e-8

_CSV_FMT = "%.17g"  # round-trip exact for float64


class NumericError(RuntimeError):
    """An underlying matrix factorization failed to converge."""


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate ``a`` as a nonempty, finite 2-D array and return it as float64."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(
            f"{name} must be a nonempty 2-D array, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return arr


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD ``a = u @ diag(singular_values) @ vt``.

    ``u`` is m-by-s with orthonormal columns, ``vt`` is s-by-n with
    orthonormal rows, and the s = min(m, n) singular values are
    nonnegative and sorted non-increasing.
    """

    u: np.ndarray
    singular_values: np.ndarray
    vt: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.singular_values) @ self.vt


def svd(a) -> SvdFactors:
    """Thin SVD of a dense matrix.

    Deterministic for identical input. Raises :class:`NumericError` if the
    factorization does not converge.
    """
    arr = as_matrix(a)
    try:
        u, s, vt = np.linalg.svd(arr, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"SVD did not converge: {exc}") from exc
    return SvdFactors(u=u, singular_values=s, vt=vt)


def frob_norm(a) -> float:
    """Frobenius norm sqrt(sum of squared entries)."""
    return float(np.linalg.norm(as_matrix(a), "fro"))


def randn_matrix(rows: int, cols: int, seed: int) -> np.ndarray:
    """Seeded matrix of i.i.d. standard-normal entries.

    The same seed always yields a bit-identical matrix.
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"matrix dimensions must be >= 1, got {rows}x{cols}")
    rng = np.random.default_rng(seed)
    return rng.standard_normal((rows, cols))


def rank_estimate(singular_values, rel_tol: float = RANK_REL_TOL) -> int:
    """Numerical rank: count of sigma_i exceeding rel_tol times the largest."""
    s = np.asarray(singular_values, dtype=np.float64)
    if s.size == 0:
        return 0
    top = float(np.max(s))
    if top <= 0.0:
        return 0
    return int(np.count_nonzero(s > rel_tol * top))


def _atomic_write_bytes(path, payload: bytes) -> None:
    """Write ``payload`` to ``path`` via a temp file + rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-pqpcp-")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_matrix_csv(a, path) -> None:
    """Write a matrix as CSV, one row per line, 17 significant digits."""
    arr = as_matrix(a)
    lines = [",".join(_CSV_FMT % v for v in row) for row in arr]
    _atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("ascii"))


def load_matrix_csv(path) -> np.ndarray:
    """Read a CSV matrix written by :func:`save_matrix_csv` (or compatible)."""
    try:
        arr = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except (ValueError, OSError) as exc:
        raise ValueError(f"malformed CSV matrix in {path!r}: {exc}") from exc
    if arr.size == 0:
        raise ValueError(f"empty CSV matrix in {path!r}")
    return as_matrix(arr, name=f"matrix from {path!r}")


def save_matrix_binary(a, path) -> None:
    """Write the raw binary layout: little-endian u64 rows, u64 cols, f64 data."""
    arr = as_matrix(a)
    header = np.array(arr.shape, dtype="<u8").tobytes()
    body = np.ascontiguousarray(arr, dtype="<f8").tobytes()
    _atomic_write_bytes(path, header + body)


def load_matrix_binary(path) -> np.ndarray:
    """Read the raw binary matrix layout written by :func:`save_matrix_binary`."""
    with open(path, "rb") as handle:
        blob = handle.read()
    if len(blob) < 16:
        raise ValueError(f"malformed binary matrix in {path!r}: truncated header")
    rows, cols = (int(v) for v in np.frombuffer(blob[:16], dtype="<u8"))
    expected = 16 + rows * cols * 8
    if rows < 1 or cols < 1 or len(blob) != expected:
        raise ValueError(
            f"malformed binary matrix in {path!r}: header says {rows}x{cols}, "
            f"file has {len(blob)} bytes (expected {expected})"
        )
    data = np.frombuffer(blob[16:], dtype="<f8").reshape(rows, cols)
    return as_matrix(data, name=f"matrix from {path!r}")


def _is_csv_path(path) -> bool:
    return str(path).lower().endswith((".csv", ".txt"))


def load_matrix(path) -> np.ndarray:
    """Load a matrix, picking the format from the extension (.csv/.txt vs binary)."""
    if _is_csv_path(path):
        return load_matrix_csv(path)
    return load_matrix_binary(path)


def save_matrix(a, path) -> None:
    """Save a matrix, picking the format from the extension (.csv/.txt vs binary)."""
    if _is_csv_path(path):
        save_matrix_csv(a, path)
    else:
        save_matrix_binary(a, path)
