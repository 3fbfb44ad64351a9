"""Experiment harness: seeded repetition suites, CSV traces, aggregates
and policy comparisons.

Per-repetition seeds are derived from the master seed by a counter-based
split, so repetitions are order-independent and a suite is reproducible
byte-for-byte from (spec, master seed).
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .benchmarks import Benchmark, get_benchmark, load_surrogate
from .policies import Policy, PolicyConfig, RunTrace, run_policy

THREADS_ENV = "HYBRIDBO_THREADS"


@dataclass(frozen=True)
class ExperimentSpec:
    """One benchmark x policy x repetitions cell of the protocol."""

    benchmark: str
    policy: Policy
    cfg: PolicyConfig
    repetitions: int = 100
    surrogate: str | None = None  # CSV path; overrides the benchmark registry
    name: str | None = None

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")

    @property
    def label(self) -> str:
        return self.name or f"{self.benchmark}-{self.policy.label()}"

    def resolve_benchmark(self) -> Benchmark:
        if self.surrogate is not None:
            return load_surrogate(self.surrogate, name=self.benchmark)
        return get_benchmark(self.benchmark)


@dataclass
class AggregateResult:
    spec: ExperimentSpec
    mean_regret: float
    regret_std_error: float
    mean_speedup: float
    mean_batch_size_by_iteration: list[float]
    traces: list[RunTrace] = field(repr=False)
    trace_files: list[Path] = field(default_factory=list)

    @property
    def final_regrets(self) -> np.ndarray:
        return np.array([t.regret_after_each_sample[-1] for t in self.traces])

    @property
    def speedups(self) -> np.ndarray:
        return np.array([t.speedup for t in self.traces])

    def regret_curves(self) -> np.ndarray:
        """(repetitions, n_l) regret-after-each-sample matrix."""
        return np.array([t.regret_after_each_sample for t in self.traces])


def rep_seed(master_seed: int, rep: int) -> int:
    """Counter-based per-repetition seed split."""
    return int(np.random.SeedSequence([master_seed, rep]).generate_state(1)[0])


def _run_one(spec: ExperimentSpec, rep: int) -> RunTrace:
    bench = spec.resolve_benchmark()
    cfg = replace(spec.cfg, seed=rep_seed(spec.cfg.seed, rep))
    return run_policy(
        bench.evaluate, spec.policy, cfg, bench.domain, bench.global_max,
        kernel=bench.kernel_config(),
    )


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        return max(1, int(raw))
    return 1


def run_suite(spec: ExperimentSpec, output_dir: str | Path | None = None) -> AggregateResult:
    """Execute all repetitions, optionally writing per-run and aggregate CSVs."""
    workers = worker_count()
    if workers > 1 and spec.surrogate is None:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(_run_one, [spec] * spec.repetitions, range(spec.repetitions)))
    else:
        traces = [_run_one(spec, rep) for rep in range(spec.repetitions)]

    finals = np.array([t.regret_after_each_sample[-1] for t in traces])
    speedups = np.array([t.speedup for t in traces])
    max_iters = max(t.total_wall_iterations for t in traces)
    sizes = np.full((len(traces), max_iters), np.nan)
    for r, t in enumerate(traces):
        sizes[r, : t.total_wall_iterations] = t.batch_sizes
    mean_sizes = [float(np.nanmean(sizes[:, i])) for i in range(max_iters)]

    stderr = float(finals.std(ddof=1) / np.sqrt(len(finals))) if len(finals) > 1 else 0.0
    result = AggregateResult(
        spec=spec,
        mean_regret=float(finals.mean()),
        regret_std_error=stderr,
        mean_speedup=float(speedups.mean()),
        mean_batch_size_by_iteration=mean_sizes,
        traces=traces,
    )
    if output_dir is not None:
        result.trace_files = write_suite(result, Path(output_dir))
    return result


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

def _fmt(value: float) -> str:
    return repr(float(value))


def trace_rows(trace: RunTrace, dimension: int, global_max: float) -> list[list[str]]:
    rows = []
    sample_index = 0
    for wall, it in enumerate(trace.iterations):
        for pos in range(len(it.true_outputs)):
            regret = trace.regret_after_each_sample[sample_index]
            sim = "" if it.simulated_outputs is None else _fmt(it.simulated_outputs[pos])
            rows.append(
                [str(sample_index), str(wall), str(pos)]
                + [_fmt(c) for c in it.points[pos]]
                + [_fmt(it.true_outputs[pos]), sim, _fmt(global_max - regret), _fmt(regret)]
            )
            sample_index += 1
    return rows


def write_suite(result: AggregateResult, output_dir: Path) -> list[Path]:
    """Write output_dir/{label}/run-{i}.csv plus aggregate.csv."""
    spec = result.spec
    bench = spec.resolve_benchmark()
    d = bench.dimension
    suite_dir = output_dir / spec.label
    suite_dir.mkdir(parents=True, exist_ok=True)
    header = (
        ["sample_index", "wall_iteration", "batch_position"]
        + [f"x{i}" for i in range(1, d + 1)]
        + ["y_true", "y_simulated", "incumbent", "regret"]
    )
    files = []
    for i, trace in enumerate(result.traces):
        path = suite_dir / f"run-{i}.csv"
        lines = [",".join(header)]
        lines += [",".join(r) for r in trace_rows(trace, d, bench.global_max)]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        files.append(path)
    agg = suite_dir / "aggregate.csv"
    agg.write_text(
        "policy,mean_regret,stderr,mean_speedup\n"
        + ",".join(
            [
                spec.policy.label(),
                _fmt(result.mean_regret),
                _fmt(result.regret_std_error),
                _fmt(result.mean_speedup),
            ]
        )
        + "\n",
        encoding="utf-8",
    )
    files.append(agg)
    return files


def compare(specs: list[ExperimentSpec], output_dir: str | Path | None = None):
    """Run several policies on one benchmark and tabulate regret curves.

    Returns (results, header, rows): a wide table of mean and stderr of
    regret per sample index, one column pair per policy.
    """
    if not specs:
        raise ValueError("compare needs at least one experiment spec")
    benchmarks = {s.benchmark for s in specs}
    budgets = {s.cfg.n_l for s in specs}
    if len(benchmarks) != 1 or len(budgets) != 1:
        raise ValueError("compared specs must share a benchmark and a budget")

    results = [run_suite(s, output_dir) for s in specs]
    n_l = specs[0].cfg.n_l
    header = ["sample_index"]
    for s in specs:
        header += [f"{s.policy.label()}_mean", f"{s.policy.label()}_stderr"]
    rows = []
    curves = [r.regret_curves() for r in results]
    for i in range(n_l):
        row = [str(i + 1)]
        for curve in curves:
            col = curve[:, i]
            se = col.std(ddof=1) / np.sqrt(len(col)) if len(col) > 1 else 0.0
            row += [_fmt(col.mean()), _fmt(se)]
        rows.append(row)
    if output_dir is not None:
        path = Path(output_dir) / f"compare-{specs[0].benchmark}.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            ",".join(header) + "\n" + "\n".join(",".join(r) for r in rows) + "\n",
            encoding="utf-8",
        )
    return results, header, rows
