"""Expected improvement, its simulated-outcome variant, and a
deterministic derivative-free maximizer over box domains."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr
from scipy.stats import qmc

from .errors import DimensionMismatchError
from .gp import BatchDraft, GpPosterior, augment, predict_batch

SIGMA_FLOOR = 1e-12
_SQRT_2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box, lower < upper coordinatewise."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float).ravel()
        upper = np.asarray(self.upper, dtype=float).ravel()
        if lower.shape != upper.shape:
            raise DimensionMismatchError(f"bounds have dimensions {lower.shape[0]} and {upper.shape[0]}")
        if not np.all(lower < upper):
            raise ValueError("lower bound must be strictly below upper bound in every coordinate")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dimension(self) -> int:
        return self.lower.shape[0]

    @property
    def sides(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, x, atol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - atol) and np.all(x <= self.upper + atol))

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    def uniform(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(n, self.dimension))


@dataclass(frozen=True)
class OptimizerConfig:
    """Budget knobs for the candidate sweep + pattern-descent maximizer."""

    grid_candidates: int = 2000
    multistarts: int = 10
    local_steps: int = 50
    seed: int = 0

    def __post_init__(self):
        if min(self.grid_candidates, self.multistarts, self.local_steps) < 1:
            raise ValueError("all optimizer counts must be >= 1")

    def with_seed(self, seed: int) -> "OptimizerConfig":
        return OptimizerConfig(self.grid_candidates, self.multistarts, self.local_steps, seed)


def default_optimizer_config(dimension: int, seed: int = 0) -> OptimizerConfig:
    """Default budget: 2000*d candidates, 10 starts, 50 descent steps."""
    return OptimizerConfig(grid_candidates=2000 * dimension, seed=seed)


def _ei_from_moments(means: np.ndarray, variances: np.ndarray, incumbent: float) -> np.ndarray:
    sigma = np.sqrt(variances)
    out = np.maximum(means - incumbent, 0.0)  # degenerate-variance limit
    ok = sigma >= SIGMA_FLOOR
    if np.any(ok):
        u = (incumbent - means[ok]) / sigma[ok]
        phi = np.exp(-0.5 * u * u) / _SQRT_2PI
        out[ok] = (-u * ndtr(-u) + phi) * sigma[ok]
    return np.maximum(out, 0.0)


def ei(gp: GpPosterior, z, y_max: float):
    """Expected improvement over the incumbent y_max.

    Accepts a single point (returns a float) or an (n, d) array of
    points (returns an (n,) array).
    """
    z = np.asarray(z, dtype=float)
    single = z.ndim == 1
    means, variances = predict_batch(gp, np.atleast_2d(z))
    values = _ei_from_moments(means, variances, y_max)
    return float(values[0]) if single else values


def ei_hat(gp: GpPosterior, draft: BatchDraft, z, y_max: float):
    """EI evaluated on the draft-augmented posterior, with the incumbent
    raised to max(y_max, max simulated output)."""
    if len(draft) == 0:
        return ei(gp, z, y_max)
    incumbent = max(y_max, float(draft.simulated_outputs.max()))
    return ei(augment(gp, draft), z, incumbent)


def maximize(objective, domain: BoxDomain, cfg: OptimizerConfig) -> np.ndarray:
    """Best point found by a scrambled low-discrepancy candidate sweep
    followed by multistart coordinate-pattern descent.

    ``objective`` must accept an (n, d) array and return (n,) values.
    Deterministic for a fixed seed; ties resolve to the earliest
    evaluated point, so a constant objective returns candidate 0.
    """
    d = domain.dimension
    sampler = qmc.Halton(d, scramble=True, seed=cfg.seed)
    unit = sampler.random(cfg.grid_candidates)
    candidates = domain.lower + unit * domain.sides
    values = np.asarray(objective(candidates), dtype=float)

    best_idx = int(np.argmax(values))  # first occurrence wins ties
    best_x = candidates[best_idx].copy()
    best_val = values[best_idx]

    n_starts = min(cfg.multistarts, len(candidates))
    # stable top-k by value, candidate order within equal values
    order = np.argsort(-values, kind="stable")[:n_starts]
    xs = candidates[order].copy()  # (s, d)
    vals = values[order].copy()
    steps = np.full(n_starts, 0.1) * np.min(domain.sides)
    min_step = 1e-6 * np.min(domain.sides)

    offsets = np.concatenate([np.eye(d), -np.eye(d)])  # (2d, d)
    for _ in range(cfg.local_steps):
        active = steps >= min_step
        if not np.any(active):
            break
        idx = np.nonzero(active)[0]
        probes = xs[idx, None, :] + steps[idx, None, None] * offsets[None, :, :]
        probes = domain.clip(probes.reshape(-1, d))
        pvals = np.asarray(objective(probes), dtype=float).reshape(len(idx), 2 * d)
        best_probe = np.argmax(pvals, axis=1)
        improved = pvals[np.arange(len(idx)), best_probe] > vals[idx]
        moved = idx[improved]
        xs[moved] = probes.reshape(len(idx), 2 * d, d)[improved, best_probe[improved]]
        vals[moved] = pvals[np.arange(len(idx)), best_probe][improved]
        steps[idx[~improved]] *= 0.5

    for s in range(n_starts):
        if vals[s] > best_val:
            best_val = vals[s]
            best_x = xs[s].copy()
    return domain.clip(best_x)
