"""Command-line front end: `run`, `compare` and `verify` subcommands.

Protocol defaults follow the benchmark dimension: 2/3-dimensional
problems get 2 initial points, a budget of 15 and epsilon 0.02; higher
dimensions get 5, 30 and 0.2.  Max batch size defaults to 5.  Every
default can be overridden by flags or a key=value config file.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .acquisition import OptimizerConfig, default_optimizer_config
from .benchmarks import benchmark_names, get_benchmark, load_surrogate
from .harness import ExperimentSpec, compare as run_compare, run_suite
from .policies import EstimatorKind, Policy, PolicyConfig
from .plots import plot_batch_sizes, plot_regret_curves
from . import theory

ESTIMATOR_ALIASES = {
    "global_max": EstimatorKind.GLOBAL_MAX,
    "m": EstimatorKind.GLOBAL_MAX,
    "incumbent": EstimatorKind.INCUMBENT,
    "ymax": EstimatorKind.INCUMBENT,
    "inflated_incumbent": EstimatorKind.INFLATED_INCUMBENT,
    "inflated": EstimatorKind.INFLATED_INCUMBENT,
    "posterior_mean": EstimatorKind.POSTERIOR_MEAN,
    "mu": EstimatorKind.POSTERIOR_MEAN,
    "incumbent_min": EstimatorKind.INCUMBENT_MIN,
    "ymin": EstimatorKind.INCUMBENT_MIN,
    "uniform_random": EstimatorKind.UNIFORM_RANDOM,
    "random": EstimatorKind.UNIFORM_RANDOM,
}


def parse_estimator(token: str) -> EstimatorKind:
    try:
        return ESTIMATOR_ALIASES[token.strip().lower()]
    except KeyError:
        raise click.BadParameter(f"unknown estimator {token!r}; known: {sorted(set(ESTIMATOR_ALIASES))}")


def parse_policy(token: str, estimator: EstimatorKind, liar: EstimatorKind, batch_size: int) -> Policy:
    """Parse 'hybrid', 'sequential', 'random', 'cl' or 'cl:<liar>[:<k>]'."""
    parts = token.strip().lower().split(":")
    kind = parts[0]
    if kind == "hybrid":
        return Policy("hybrid")
    if kind in ("sequential", "seq"):
        return Policy("sequential")
    if kind == "random":
        return Policy("random")
    if kind in ("cl", "constant_liar"):
        lie = parse_estimator(parts[1]) if len(parts) > 1 else liar
        k = int(parts[2]) if len(parts) > 2 else batch_size
        return Policy("constant_liar", liar=lie, batch_size=k)
    raise click.BadParameter(f"unknown policy {token!r}")


def load_config_overrides(ctx: click.Context, param, value):
    """Apply key=value pairs from a config file as option defaults."""
    if value is None:
        return None
    overrides = {}
    for lineno, line in enumerate(Path(value).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise click.BadParameter(f"{value}:{lineno}: expected key=value, got {line!r}")
        key, _, raw = line.partition("=")
        overrides[key.strip().replace("-", "_")] = raw.strip()
    ctx.default_map = {**(ctx.default_map or {}), **overrides}
    return value


CONFIG_OPTION = click.option(
    "--config",
    type=click.Path(exists=True, dir_okay=False),
    callback=load_config_overrides,
    expose_value=False,
    is_eager=True,
    help="key=value file overriding option defaults",
)


def _protocol_defaults(dimension: int) -> tuple[int, int, float]:
    """(init points, budget, epsilon) per the dimension rule."""
    if dimension <= 3:
        return 2, 15, 0.02
    return 5, 30, 0.2


def _build_spec(
    benchmark, surrogate, policy, estimator, liar, batch_size, budget, max_batch,
    epsilon, zeta, init, reps, seed, name=None,
) -> ExperimentSpec:
    if surrogate:
        bench = load_surrogate(surrogate, name=benchmark or Path(surrogate).stem)
        bench_name = bench.name
    else:
        bench_name = benchmark or "cosines"
        bench = get_benchmark(bench_name)
    init_d, budget_d, eps_d = _protocol_defaults(bench.dimension)
    cfg = PolicyConfig(
        n_l=budget if budget is not None else budget_d,
        n_b=max_batch,
        epsilon=epsilon if epsilon is not None else eps_d,
        estimator=parse_estimator(estimator),
        zeta=zeta,
        init_points=init if init is not None else init_d,
        seed=seed,
        optimizer=default_optimizer_config(bench.dimension),
    )
    pol = parse_policy(policy, cfg.estimator, parse_estimator(liar), batch_size or max_batch)
    return ExperimentSpec(
        benchmark=bench_name, policy=pol, cfg=cfg, repetitions=reps,
        surrogate=surrogate, name=name,
    )


def common_options(fn):
    for opt in reversed(
        [
            click.option("--benchmark", type=str, default=None,
                         help=f"one of {', '.join(benchmark_names())} (default cosines), "
                              "or a name for --surrogate"),
            click.option("--surrogate", type=click.Path(exists=True, dir_okay=False), default=None,
                         help="CSV file (header x1,...,xd,y) fitted as a surrogate objective"),
            click.option("--estimator", type=str, default="posterior_mean", show_default=True),
            click.option("--liar", type=str, default="posterior_mean", show_default=True),
            click.option("--batch-size", type=int, default=None, help="constant-liar batch size"),
            click.option("--budget", type=int, default=None, help="total budget n_l"),
            click.option("--max-batch", type=int, default=5, show_default=True),
            click.option("--epsilon", type=float, default=None),
            click.option("--zeta", type=float, default=0.1, show_default=True),
            click.option("--init", type=int, default=None, help="initial random points"),
            click.option("--reps", type=int, default=100, show_default=True),
            click.option("--seed", type=int, default=0, show_default=True),
            click.option("--out", type=click.Path(file_okay=False), default="results", show_default=True),
            CONFIG_OPTION,
        ]
    ):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Hybrid sequential/batch Bayesian optimization harness."""


@main.command()
@click.option("--policy", type=str, default="hybrid", show_default=True)
@common_options
def run(policy, benchmark, surrogate, estimator, liar, batch_size, budget, max_batch,
        epsilon, zeta, init, reps, seed, out):
    """Run one policy suite; write per-run traces, aggregate and figures."""
    spec = _build_spec(benchmark, surrogate, policy, estimator, liar, batch_size,
                       budget, max_batch, epsilon, zeta, init, reps, seed)
    result = run_suite(spec, out)
    suite_dir = Path(out) / spec.label
    plot_regret_curves([result], suite_dir / "regret.png")
    plot_batch_sizes(result, suite_dir / "batch_sizes.png")
    click.echo(
        f"{spec.label}: mean regret {result.mean_regret:.4f} "
        f"(stderr {result.regret_std_error:.4f}), mean speedup {result.mean_speedup:.2%}"
    )
    click.echo(f"wrote {suite_dir}")


@main.command(name="compare")
@click.option("--policy", "policies", type=str, multiple=True, required=True,
              help="repeatable; e.g. sequential, hybrid, cl:mu:5")
@common_options
def compare_cmd(policies, benchmark, surrogate, estimator, liar, batch_size, budget,
                max_batch, epsilon, zeta, init, reps, seed, out):
    """Run several policies on one benchmark; write a wide regret table."""
    if not policies:
        raise click.UsageError("at least one --policy is required")
    specs = [
        _build_spec(benchmark, surrogate, token, estimator, liar, batch_size,
                    budget, max_batch, epsilon, zeta, init, reps, seed)
        for token in policies
    ]
    results, _, _ = run_compare(specs, out)
    plot_regret_curves(results, Path(out) / f"compare-{specs[0].benchmark}.png")
    for result in results:
        click.echo(
            f"{result.spec.policy.label()}: mean regret {result.mean_regret:.4f}, "
            f"mean speedup {result.mean_speedup:.2%}"
        )
    click.echo(f"wrote {Path(out) / f'compare-{specs[0].benchmark}.csv'}")


def _write_report(rows: list[tuple], path: Path) -> None:
    lines = ["instance,lhs,rhs,valid"]
    lines += [f"{i},{lhs!r},{rhs!r},{int(valid)}" for i, lhs, rhs, valid in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


@main.command()
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default="verification", show_default=True)
@click.option("--quick", is_flag=True, help="small sweeps for a fast smoke check")
def verify(seed, out, quick):
    """Run every identity/bound suite; nonzero exit on any violation."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    scale = 0.05 if quick else 1.0
    n = lambda full: max(10, int(full * scale))
    suites = [
        ("theorem1", lambda: theory.theorem1_sweep(n(1000), seed)),
        ("theorem2", lambda: theory.theorem2_sweep(n(1000), seed)),
        ("corollary1", lambda: theory.corollary1_sweep(n(100), n_draws=n(100_000), seed=seed)),
        ("lemma1", lambda: theory.lemma1_sweep(n(1000), seed)),
        ("theorem3", lambda: theory.theorem3_sweep(n_valid=n(200), seed=seed)),
        ("corollary2", lambda: theory.corollary2_sweep(n(50), seed=seed)),
        ("corollary3", lambda: theory.corollary3_sweep(n(50), n_draws=n(100_000), seed=seed)),
    ]
    failed = False
    for name, runner in suites:
        report, rows = runner()
        _write_report(rows, out / f"{name}.csv")
        click.echo(report.line())
        failed = failed or not report.passed
    if failed:
        sys.exit(2)


if __name__ == "__main__":
    main()
