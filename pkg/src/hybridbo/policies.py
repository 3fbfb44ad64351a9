"""Query-selection policies: the hybrid variable-batch EI algorithm and
the sequential-EI, constant-liar and random baselines.

A run alternates wall iterations: the policy drafts a batch (size 1 for
sequential/random), the whole batch is evaluated at once, true outputs
replace simulated ones, and the posterior is refitted.  Simulated
outputs never enter the observation set.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.spatial.distance import cdist

from .acquisition import BoxDomain, OptimizerConfig, default_optimizer_config, ei, maximize
from .errors import ObjectiveEvaluationError
from .gp import (
    DUPLICATE_TOL,
    BatchDraft,
    GpPosterior,
    KernelConfig,
    ObservationSet,
    augment,
    fit,
    gamma,
    predict_batch,
    theta,
)


class EstimatorKind(Enum):
    """Strategies for simulating the outcome of a drafted experiment."""

    GLOBAL_MAX = "global_max"
    INCUMBENT = "incumbent"
    INFLATED_INCUMBENT = "inflated_incumbent"
    POSTERIOR_MEAN = "posterior_mean"
    INCUMBENT_MIN = "incumbent_min"
    UNIFORM_RANDOM = "uniform_random"


@dataclass(frozen=True)
class PolicyConfig:
    """Budget and threshold knobs for a single optimization run."""

    n_l: int
    n_b: int
    epsilon: float
    estimator: EstimatorKind = EstimatorKind.POSTERIOR_MEAN
    zeta: float = 0.1
    init_points: int = 2
    seed: int = 0
    optimizer: OptimizerConfig | None = None

    def __post_init__(self):
        if self.n_l < 1 or self.n_b < 1 or self.n_b > self.n_l:
            raise ValueError(f"need 1 <= n_b <= n_l, got n_b={self.n_b}, n_l={self.n_l}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")
        if self.zeta < 0:
            raise ValueError(f"zeta must be nonnegative, got {self.zeta}")
        if self.init_points < 1:
            raise ValueError("init_points must be >= 1")


@dataclass(frozen=True)
class Policy:
    """Which selection rule a run uses."""

    kind: str  # hybrid | sequential | constant_liar | random
    liar: EstimatorKind | None = None
    batch_size: int | None = None

    KINDS = ("hybrid", "sequential", "constant_liar", "random")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.kind == "constant_liar" and (self.liar is None or self.batch_size is None):
            raise ValueError("constant_liar needs a liar kind and a batch size")

    def label(self) -> str:
        if self.kind == "hybrid":
            return "hybrid"
        if self.kind == "constant_liar":
            return f"cl-{self.liar.value}-{self.batch_size}"
        return self.kind


@dataclass
class IterationRecord:
    """One wall iteration: the batch, its outcomes, and the simulations."""

    points: np.ndarray
    true_outputs: np.ndarray
    simulated_outputs: np.ndarray | None


@dataclass
class RunTrace:
    iterations: list[IterationRecord]
    regret_after_each_sample: list[float]
    total_wall_iterations: int
    speedup: float

    @property
    def batch_sizes(self) -> list[int]:
        return [len(it.true_outputs) for it in self.iterations]


@dataclass
class GuardRecord:
    """One evaluation of the batch-continuation criterion."""

    draft_size: int
    gamma: float
    theta: float
    bias: float
    lhs: float
    admitted: bool


def estimate_output(
    kind: EstimatorKind,
    gp: GpPosterior,
    x,
    known_M: float | None,
    rng: np.random.Generator,
    zeta: float = 0.1,
) -> float:
    """Simulated outcome for a drafted point under the chosen strategy."""
    if kind is EstimatorKind.GLOBAL_MAX:
        if known_M is None:
            raise ValueError("GLOBAL_MAX estimator needs the benchmark's known maximum")
        return float(known_M)
    if kind is EstimatorKind.INCUMBENT:
        return gp.y_max
    if kind is EstimatorKind.INFLATED_INCUMBENT:
        return (1.0 + zeta) * gp.y_max
    if kind is EstimatorKind.POSTERIOR_MEAN:
        means, _ = predict_batch(gp, np.atleast_2d(np.asarray(x, dtype=float)))
        return float(means[0])
    if kind is EstimatorKind.INCUMBENT_MIN:
        return gp.y_min
    if kind is EstimatorKind.UNIFORM_RANDOM:
        return float(rng.uniform(gp.y_min, gp.y_max))
    raise ValueError(f"unknown estimator kind {kind!r}")


def _draw_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(2**31 - 1))


def _ensure_distinct(
    point: np.ndarray,
    existing: np.ndarray,
    domain: BoxDomain,
    rng: np.random.Generator,
) -> np.ndarray:
    """Replace a colliding point by a fresh uniform draw (rare fallback)."""
    for _ in range(1000):
        if not len(existing) or cdist(point[None, :], existing).min() > DUPLICATE_TOL:
            return point
        point = domain.uniform(rng, 1)[0]
    raise RuntimeError("could not find a distinct point in the domain")


def _greedy_draft(
    gp: GpPosterior,
    domain: BoxDomain,
    opt: OptimizerConfig,
    estimator: EstimatorKind,
    zeta: float,
    known_M: float | None,
    rng: np.random.Generator,
    max_size: int,
    epsilon: float | None,
    guard_log: list[GuardRecord] | None = None,
) -> BatchDraft:
    """Grow a batch greedily by simulated EI.

    The first point maximizes plain EI and is always admitted.  Each
    further candidate maximizes EI on the draft-augmented posterior and,
    when ``epsilon`` is given, is admitted only while the continuation
    criterion holds.  ``epsilon=None`` disables the guard (constant
    liar).
    """
    y_max = gp.y_max
    x1 = maximize(lambda pts: ei(gp, pts, y_max), domain, opt.with_seed(_draw_seed(rng)))
    x1 = _ensure_distinct(x1, gp.observations.inputs, domain, rng)
    if max_size == 1:
        # no further selection conditions on the simulated outcome
        return BatchDraft(x1[None, :], [estimate_output(estimator, gp, x1, known_M, rng, zeta)])
    draft = BatchDraft(x1[None, :], [estimate_output(estimator, gp, x1, known_M, rng, zeta)])
    while len(draft) < max_size:
        aug = augment(gp, draft)
        incumbent = max(y_max, float(draft.simulated_outputs.max()))
        z = maximize(lambda pts: ei(aug, pts, incumbent), domain, opt.with_seed(_draw_seed(rng)))
        z = _ensure_distinct(z, np.vstack([gp.observations.inputs, draft.points]), domain, rng)
        if epsilon is not None:
            g = gamma(gp, draft.points, z)
            th = theta(gp, draft.points)
            means, _ = predict_batch(gp, draft.points)
            bias = float(np.linalg.norm(draft.simulated_outputs - means))
            lhs = g * (th + bias)
            admitted = lhs <= epsilon
            if guard_log is not None:
                guard_log.append(GuardRecord(len(draft), g, th, bias, lhs, admitted))
            if not admitted:
                break
        draft = BatchDraft(
            np.vstack([draft.points, z[None, :]]),
            np.concatenate([draft.simulated_outputs, [estimate_output(estimator, gp, z, known_M, rng, zeta)]]),
        )
    return draft


def hybrid_batch_step(
    gp: GpPosterior,
    cfg: PolicyConfig,
    domain: BoxDomain,
    remaining: int,
    rng: np.random.Generator,
    known_M: float | None = None,
    guard_log: list[GuardRecord] | None = None,
) -> BatchDraft:
    """One wall iteration of the hybrid algorithm: EI first point, then
    simulated-EI points while the continuation criterion stays below
    epsilon and size/budget limits allow."""
    if remaining < 1:
        raise ValueError("no budget remaining")
    opt = cfg.optimizer or default_optimizer_config(domain.dimension)
    return _greedy_draft(
        gp, domain, opt, cfg.estimator, cfg.zeta, known_M, rng,
        max_size=min(cfg.n_b, remaining), epsilon=cfg.epsilon, guard_log=guard_log,
    )


def constant_liar_batch(
    gp: GpPosterior,
    k: int,
    lie: EstimatorKind,
    domain: BoxDomain,
    cfg: OptimizerConfig,
    known_M: float | None,
    rng: np.random.Generator,
) -> BatchDraft:
    """Greedy batch of k points by simulated EI with unguarded admission.

    ``lie = POSTERIOR_MEAN`` reproduces the mu-constant batch strategy.
    """
    if k < 1:
        raise ValueError("batch size must be >= 1")
    return _greedy_draft(gp, domain, cfg, lie, 0.1, known_M, rng, max_size=k, epsilon=None)


def run_policy(
    f,
    policy: Policy,
    cfg: PolicyConfig,
    domain: BoxDomain,
    known_M: float,
    kernel: KernelConfig | None = None,
    guard_log: list[GuardRecord] | None = None,
) -> RunTrace:
    """Run one seeded optimization episode and return its trace.

    ``f`` maps an (n, d) array of inputs to (n,) outputs.  The run draws
    ``init_points`` uniform random points (outside the n_l budget), then
    loops the policy until the budget is exhausted, evaluating each batch
    at once.  Simple regret (known_M minus the incumbent) is recorded
    after every budgeted sample.
    """
    rng = np.random.default_rng(cfg.seed)
    if kernel is None:
        kernel = KernelConfig(width=0.01 * float(domain.sides.sum()))
    opt = cfg.optimizer or default_optimizer_config(domain.dimension)
    cfg = replace(cfg, optimizer=opt)

    init = domain.uniform(rng, cfg.init_points)
    # uniform draws collide with probability 0; regenerate defensively
    while len(init) > 1 and np.min(cdist(init, init) + np.eye(len(init)) * 1e9) <= DUPLICATE_TOL:
        init = domain.uniform(rng, cfg.init_points)

    iterations: list[IterationRecord] = []

    def evaluate(points: np.ndarray) -> np.ndarray:
        try:
            return np.asarray(f(points), dtype=float).ravel()
        except Exception as exc:
            partial = RunTrace(iterations, regrets, len(iterations), 0.0)
            raise ObjectiveEvaluationError(f"objective failed: {exc}", partial) from exc

    regrets: list[float] = []
    y_init = evaluate(init)
    obs = ObservationSet(init, y_init)
    gp = fit(obs, kernel)
    best = float(y_init.max())

    remaining = cfg.n_l
    while remaining > 0:
        if policy.kind == "hybrid":
            draft = hybrid_batch_step(gp, cfg, domain, remaining, rng, known_M, guard_log)
            points, sims = draft.points, draft.simulated_outputs
        elif policy.kind == "sequential":
            opt_seeded = opt.with_seed(_draw_seed(rng))
            x = maximize(lambda pts: ei(gp, pts, gp.y_max), domain, opt_seeded)
            x = _ensure_distinct(x, gp.observations.inputs, domain, rng)
            points, sims = x[None, :], None
        elif policy.kind == "constant_liar":
            k = min(policy.batch_size, remaining)
            draft = constant_liar_batch(gp, k, policy.liar, domain, opt, known_M, rng)
            points, sims = draft.points, draft.simulated_outputs
        elif policy.kind == "random":
            x = _ensure_distinct(domain.uniform(rng, 1)[0], gp.observations.inputs, domain, rng)
            points, sims = x[None, :], None
        else:  # pragma: no cover - Policy validates kind
            raise ValueError(policy.kind)

        y_true = evaluate(points)
        iterations.append(IterationRecord(points, y_true, None if sims is None else sims.copy()))
        for y in y_true:
            best = max(best, float(y))
            regrets.append(known_M - best)
        obs = obs.extend(points, y_true)
        gp = fit(obs, kernel)
        remaining -= len(y_true)

    t = len(iterations)
    return RunTrace(iterations, regrets, t, 1.0 - t / cfg.n_l)
