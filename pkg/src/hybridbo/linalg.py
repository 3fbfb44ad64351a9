"""Single SPD factorization abstraction used by every linear-algebra path.

Both the fast incremental-variance path and the full-refit oracle go
through :class:`SpdFactor`, so they share numeric conventions (Cholesky,
lower triangular, no finiteness re-checks).  An optional instrumentation
hook records the size of every *new* factorization, which lets tests
assert that the incremental path never factors anything larger than the
batch block.
"""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular

from .errors import ConditioningError

_factor_sizes: list[int] | None = None


@contextmanager
def track_factorizations():
    """Collect the sizes of SPD factorizations performed inside the block."""
    global _factor_sizes
    prev = _factor_sizes
    _factor_sizes = []
    try:
        yield _factor_sizes
    finally:
        _factor_sizes = prev


class SpdFactor:
    """Cholesky factorization of a symmetric positive-definite matrix."""

    def __init__(self, mat: np.ndarray):
        mat = np.asarray(mat, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {mat.shape}")
        try:
            self._lower = cholesky(mat, lower=True, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise ConditioningError(f"Cholesky failed for {mat.shape[0]}x{mat.shape[0]} matrix") from exc
        if _factor_sizes is not None:
            _factor_sizes.append(mat.shape[0])

    @property
    def size(self) -> int:
        return self._lower.shape[0]

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Return A^{-1} b."""
        return cho_solve((self._lower, True), b, check_finite=False)

    def half_solve(self, b: np.ndarray) -> np.ndarray:
        """Return L^{-1} b, where A = L L^T.

        Useful for quadratic forms: b^T A^{-1} b = ||L^{-1} b||^2.
        """
        return solve_triangular(self._lower, b, lower=True, check_finite=False)
