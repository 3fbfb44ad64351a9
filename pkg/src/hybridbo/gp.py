"""Noise-free Gaussian-process posterior with incremental batch updates.

The model is a zero-mean GP with the squared-exponential kernel
``k(a, b) = exp(-||a - b||^2 / width)`` (unit signal variance).  A fitted
posterior caches one Cholesky factorization of the observation Gram
matrix; all batch-update quantities (variance reduction, the mean-shift
sensitivity ``gamma``, the outcome-uncertainty scale ``theta`` and the
batch-continuation value) reuse that cache and only factor the small
batch block.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConditioningError, DimensionMismatchError, DuplicatePointError
from .linalg import SpdFactor

DUPLICATE_TOL = 1e-12
VARIANCE_CLAMP = 1e-12
MAX_JITTER = 1e-6


def _as_points(x, name: str = "points") -> np.ndarray:
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    if pts.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array of points, got ndim={pts.ndim}")
    return pts


def _check_distinct(points: np.ndarray, others: np.ndarray | None = None) -> None:
    if len(points) > 1:
        d = cdist(points, points)
        np.fill_diagonal(d, np.inf)
        if d.min() <= DUPLICATE_TOL:
            i, j = np.unravel_index(np.argmin(d), d.shape)
            raise DuplicatePointError(f"points {i} and {j} coincide within {DUPLICATE_TOL}")
    if others is not None and len(others) and len(points):
        d = cdist(points, others)
        if d.min() <= DUPLICATE_TOL:
            raise DuplicatePointError(f"a point duplicates an existing input within {DUPLICATE_TOL}")


@dataclass(frozen=True)
class ObservationSet:
    """Finalized (input, true-output) pairs."""

    inputs: np.ndarray
    outputs: np.ndarray

    def __post_init__(self):
        inputs = _as_points(self.inputs, "inputs")
        outputs = np.asarray(self.outputs, dtype=float).ravel()
        if len(inputs) != len(outputs):
            raise ValueError(f"{len(inputs)} inputs but {len(outputs)} outputs")
        _check_distinct(inputs)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "outputs", outputs)

    def __len__(self) -> int:
        return len(self.outputs)

    @property
    def dimension(self) -> int:
        return self.inputs.shape[1]

    def extend(self, points, outputs) -> "ObservationSet":
        points = _as_points(points)
        outputs = np.asarray(outputs, dtype=float).ravel()
        return ObservationSet(
            np.vstack([self.inputs, points]),
            np.concatenate([self.outputs, outputs]),
        )


@dataclass(frozen=True)
class KernelConfig:
    """Squared-exponential kernel width plus diagonal jitter."""

    width: float
    jitter: float = 1e-10

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError(f"kernel width must be positive, got {self.width}")
        if not 0 <= self.jitter <= MAX_JITTER:
            raise ValueError(f"jitter must be in [0, {MAX_JITTER}], got {self.jitter}")


@dataclass(frozen=True)
class BatchDraft:
    """Pending batch of points with simulated outputs."""

    points: np.ndarray
    simulated_outputs: np.ndarray

    def __post_init__(self):
        points = _as_points(self.points)
        outputs = np.asarray(self.simulated_outputs, dtype=float).ravel()
        if len(points) != len(outputs):
            raise ValueError(f"{len(points)} points but {len(outputs)} simulated outputs")
        _check_distinct(points)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "simulated_outputs", outputs)

    def __len__(self) -> int:
        return len(self.simulated_outputs)


@dataclass(frozen=True)
class PosteriorPrediction:
    mean: float
    variance: float


def kernel_eval(a, b, cfg: KernelConfig) -> float:
    """k(a, b) = exp(-||a - b||^2 / width)."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise DimensionMismatchError(f"points have dimensions {a.shape[0]} and {b.shape[0]}")
    return float(np.exp(-np.sum((a - b) ** 2) / cfg.width))


def kernel_matrix(a, b, cfg: KernelConfig) -> np.ndarray:
    """Cross-kernel matrix between two sets of points."""
    a = _as_points(a)
    b = _as_points(b)
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatchError(f"point sets have dimensions {a.shape[1]} and {b.shape[1]}")
    return np.exp(-cdist(a, b, "sqeuclidean") / cfg.width)


@dataclass(frozen=True)
class GpPosterior:
    """Immutable fitted posterior; concurrent read-only queries are safe."""

    observations: ObservationSet
    kernel: KernelConfig
    effective_jitter: float
    factorization: SpdFactor = field(repr=False)
    alpha: np.ndarray = field(repr=False)  # A^{-1} y, cached

    @property
    def dimension(self) -> int:
        return self.observations.dimension

    @property
    def y_max(self) -> float:
        return float(self.observations.outputs.max())

    @property
    def y_min(self) -> float:
        return float(self.observations.outputs.min())


def fit(obs: ObservationSet, cfg: KernelConfig) -> GpPosterior:
    """Fit the posterior, escalating jitter x10 up to 1e-6 if the Gram
    matrix is numerically indefinite."""
    if len(obs) == 0:
        raise ValueError("cannot fit on an empty observation set")
    gram = kernel_matrix(obs.inputs, obs.inputs, cfg)
    jitter = max(cfg.jitter, 1e-10)
    while True:
        try:
            factor = SpdFactor(gram + jitter * np.eye(len(obs)))
            break
        except ConditioningError:
            if jitter >= MAX_JITTER:
                raise ConditioningError(
                    f"Gram matrix not SPD even at jitter {jitter:g} "
                    f"(n={len(obs)}, width={cfg.width:g})"
                )
            jitter = min(jitter * 10, MAX_JITTER)
    alpha = factor.solve(obs.outputs)
    return GpPosterior(obs, cfg, jitter, factor, alpha)


def predict_batch(gp: GpPosterior, z) -> tuple[np.ndarray, np.ndarray]:
    """Posterior means and variances at a set of query points."""
    z = _as_points(z)
    kzx = kernel_matrix(z, gp.observations.inputs, gp.kernel)
    means = kzx @ gp.alpha
    w = gp.factorization.half_solve(kzx.T)
    variances = 1.0 - np.sum(w * w, axis=0)
    variances[(variances < 0) & (variances > -VARIANCE_CLAMP)] = 0.0
    return means, np.clip(variances, 0.0, 1.0)


def predict(gp: GpPosterior, z) -> PosteriorPrediction:
    """Posterior mean/variance at a single point."""
    means, variances = predict_batch(gp, np.atleast_2d(np.asarray(z, dtype=float)))
    return PosteriorPrediction(float(means[0]), float(variances[0]))


def augment(gp: GpPosterior, draft: BatchDraft) -> GpPosterior:
    """Posterior refitted on observations plus the draft's simulated pairs.

    Uses the parent's effective jitter so augmented and parent posteriors
    share numeric conventions exactly.
    """
    if len(draft) == 0:
        return gp
    _check_distinct(draft.points, gp.observations.inputs)
    combined = gp.observations.extend(draft.points, draft.simulated_outputs)
    return fit(combined, KernelConfig(gp.kernel.width, gp.effective_jitter))


def predict_with_draft(gp: GpPosterior, draft: BatchDraft, z) -> PosteriorPrediction:
    """Mean/variance at z after conditioning on the draft's simulated outputs.

    The variance equals that of a GP refitted on the draft points and is
    independent of the simulated output values.
    """
    return predict(augment(gp, draft), z)


def _batch_blocks(gp: GpPosterior, x) -> tuple[np.ndarray, np.ndarray, SpdFactor]:
    """Shared blocks for the incremental formulas.

    Returns (V, Kxx_j, S) with V = A^{-1} B^T (n x m), the jittered batch
    Gram block, and the factored Schur complement S = Kxx_j - B A^{-1} B^T.
    Only the m x m Schur block is newly factored.
    """
    x = _as_points(x)
    obs_x = gp.observations.inputs
    b = kernel_matrix(x, obs_x, gp.kernel)  # B, m x n
    v = gp.factorization.solve(b.T)  # A^{-1} B^T, n x m
    kxx = kernel_matrix(x, x, gp.kernel) + gp.effective_jitter * np.eye(len(x))
    try:
        schur = SpdFactor(kxx - b @ v)
    except ConditioningError as exc:
        raise ConditioningError(
            "batch covariance block is numerically singular "
            "(batch points nearly duplicate or fully determined)"
        ) from exc
    return v, kxx, schur


def delta_variance(gp: GpPosterior, x, z) -> float:
    """Variance reduction at z from querying the batch x.

    Equals var(z | observations) - var(z | observations + x), computed
    from the cached factorization plus one batch-sized factorization.
    """
    v, _, schur = _batch_blocks(gp, x)
    c = kernel_matrix(np.atleast_2d(np.asarray(z, dtype=float)), gp.observations.inputs, gp.kernel)
    kzx = kernel_matrix(np.atleast_2d(np.asarray(z, dtype=float)), _as_points(x), gp.kernel)
    r = (c @ v - kzx).ravel()  # C A^{-1} B^T - k(z, x)
    half = schur.half_solve(r)
    return float(half @ half)


def mean_shift_row(gp: GpPosterior, x, z) -> np.ndarray:
    """Row vector (k(z,x) - C A^{-1} B^T) S^{-1} mapping output errors at
    the batch points to the induced posterior-mean shift at z."""
    v, _, schur = _batch_blocks(gp, x)
    c = kernel_matrix(np.atleast_2d(np.asarray(z, dtype=float)), gp.observations.inputs, gp.kernel)
    kzx = kernel_matrix(np.atleast_2d(np.asarray(z, dtype=float)), _as_points(x), gp.kernel)
    row = (kzx - c @ v).ravel()
    return schur.solve(row)


def gamma(gp: GpPosterior, x, z) -> float:
    """Sensitivity of the posterior mean at z to output errors at the batch x.

    2-norm of the row vector (k(z,x) - C A^{-1} B^T) S^{-1}.
    """
    return float(np.linalg.norm(mean_shift_row(gp, x, z)))


def theta(gp: GpPosterior, x) -> float:
    """Square root of the summed marginal posterior variances at the batch
    points (each conditioned on the observations only)."""
    x = _as_points(x)
    if len(x) == 0:
        raise ValueError("theta requires at least one batch point")
    _, variances = predict_batch(gp, x)
    return float(np.sqrt(variances.sum()))


def continuation_lhs(gp: GpPosterior, draft: BatchDraft, z) -> float:
    """Left-hand side of the batch-continuation criterion at candidate z:
    gamma_z * (theta + ||simulated - posterior means at draft points||)."""
    if len(draft) == 0:
        raise ValueError("continuation criterion needs a non-empty draft")
    means, _ = predict_batch(gp, draft.points)
    bias = float(np.linalg.norm(draft.simulated_outputs - means))
    return gamma(gp, draft.points, z) * (theta(gp, draft.points) + bias)
