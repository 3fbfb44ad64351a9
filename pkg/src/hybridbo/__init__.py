"""Hybrid sequential/batch Bayesian optimization with expected improvement."""

from .acquisition import BoxDomain, OptimizerConfig, default_optimizer_config, ei, ei_hat, maximize
from .benchmarks import Benchmark, benchmark_names, get_benchmark, load_surrogate
from .errors import (
    ConditioningError,
    DimensionMismatchError,
    DuplicatePointError,
    ObjectiveEvaluationError,
)
from .gp import (
    BatchDraft,
    GpPosterior,
    KernelConfig,
    ObservationSet,
    PosteriorPrediction,
    continuation_lhs,
    delta_variance,
    fit,
    gamma,
    kernel_eval,
    predict,
    predict_batch,
    predict_with_draft,
    theta,
)
from .harness import AggregateResult, ExperimentSpec, compare, run_suite
from .policies import (
    EstimatorKind,
    Policy,
    PolicyConfig,
    RunTrace,
    constant_liar_batch,
    estimate_output,
    hybrid_batch_step,
    run_policy,
)

__version__ = "0.1.0"
