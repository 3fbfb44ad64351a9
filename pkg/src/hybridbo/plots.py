"""Figure rendering for suite and comparison reports.

Figures are written next to the delimited output so a report directory
is self-contained: regret trajectories with stderr bands and the mean
batch-size profile.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import AggregateResult


def plot_regret_curves(results: list[AggregateResult], path: str | Path, title: str | None = None) -> Path:
    """Mean regret vs sample index, one line per policy, stderr band."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for result in results:
        curves = result.regret_curves()
        x = np.arange(1, curves.shape[1] + 1)
        mean = curves.mean(axis=0)
        se = curves.std(ddof=1, axis=0) / np.sqrt(len(curves)) if len(curves) > 1 else np.zeros_like(mean)
        ax.plot(x, mean, label=result.spec.policy.label())
        ax.fill_between(x, mean - se, mean + se, alpha=0.2)
    ax.set_xlabel("sample index")
    ax.set_ylabel("simple regret")
    ax.set_title(title or results[0].spec.benchmark)
    ax.legend()
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_batch_sizes(result: AggregateResult, path: str | Path) -> Path:
    """Mean batch size per wall iteration for one suite."""
    path = Path(path)
    sizes = result.mean_batch_size_by_iteration
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.bar(np.arange(1, len(sizes) + 1), sizes)
    ax.set_xlabel("wall iteration")
    ax.set_ylabel("mean batch size")
    ax.set_title(f"{result.spec.label}: mean speedup {result.mean_speedup:.2f}")
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
