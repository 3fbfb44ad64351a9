"""Benchmark objectives: six synthetic maximization problems plus a
tabulated-surrogate loader for fitted real-data objectives.

All objectives are pure and vectorized: they accept an (n, d) array and
return an (n,) array (a single d-vector also works).  Every benchmark
records its box, global maximum and the kernel width rule
``0.01 * sum of box side lengths``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np

from .acquisition import BoxDomain, OptimizerConfig, maximize
from .gp import KernelConfig, ObservationSet, fit, predict_batch


def _as_batch(x, dimension: int) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != dimension:
        raise ValueError(f"expected {dimension}-dimensional points, got shape {x.shape}")
    return x, single


@dataclass(frozen=True)
class Benchmark:
    """A maximization problem with a known (or scanned) global maximum."""

    name: str
    domain: BoxDomain
    _raw: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    global_max: float
    argmax: np.ndarray | None = None

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    @property
    def kernel_width(self) -> float:
        return 0.01 * float(self.domain.sides.sum())

    def kernel_config(self) -> KernelConfig:
        return KernelConfig(width=self.kernel_width)

    def evaluate(self, x):
        batch, single = _as_batch(x, self.dimension)
        if np.any(batch < self.domain.lower - 1e-9) or np.any(batch > self.domain.upper + 1e-9):
            raise ValueError(f"input outside the {self.name} box")
        values = self._raw(batch)
        return float(values[0]) if single else values

    __call__ = evaluate


# ---------------------------------------------------------------------------
# Synthetic objectives
# ---------------------------------------------------------------------------

def cosines_raw(x: np.ndarray) -> np.ndarray:
    u = 1.6 * x[:, 0] - 0.5
    v = 1.6 * x[:, 1] - 0.5
    return 1.0 - (u**2 + v**2 - 0.3 * np.cos(3 * np.pi * u) - 0.3 * np.cos(3 * np.pi * v))


def rosenbrock_raw(x: np.ndarray) -> np.ndarray:
    a, b = x[:, 0], x[:, 1]
    return 10.0 - 100.0 * (b - a**2) ** 2 - (1.0 - a) ** 2


# Hartmann / Shekel constant tables (Dixon & Szego).  The checksums are
# asserted in the test suite to guard against transcription slips.
HARTMAN_OMEGA = np.array([1.0, 1.2, 3.0, 3.2])

HARTMAN3_A = np.array([
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
])
HARTMAN3_P = 1e-4 * np.array([
    [3689, 1170, 2673],
    [4699, 4387, 7470],
    [1091, 8732, 5547],
    [381, 5743, 8828],
])

HARTMAN6_A = np.array([
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
])
HARTMAN6_P = 1e-4 * np.array([
    [1312, 1696, 5569, 124, 8283, 5886],
    [2329, 4135, 8307, 3736, 1004, 9991],
    [2348, 1451, 3522, 2883, 3047, 6650],
    [4047, 8828, 8732, 5743, 1091, 381],
])

SHEKEL_OMEGA = np.array([0.1, 0.2, 0.2, 0.4, 0.4, 0.6, 0.3, 0.7, 0.5, 0.5])
SHEKEL_B = np.array([
    [4.0, 1.0, 8.0, 6.0, 3.0, 2.0, 5.0, 8.0, 6.0, 7.0],
    [4.0, 1.0, 8.0, 6.0, 7.0, 9.0, 5.0, 1.0, 2.0, 3.6],
    [4.0, 1.0, 8.0, 6.0, 3.0, 2.0, 3.0, 8.0, 6.0, 7.0],
    [4.0, 1.0, 8.0, 6.0, 7.0, 9.0, 3.0, 1.0, 2.0, 3.6],
])


def _hartman_raw(x: np.ndarray, a: np.ndarray, p: np.ndarray) -> np.ndarray:
    # sum_i omega_i * exp(-sum_j a_ij (x_j - p_ij)^2)
    sq = (x[:, None, :] - p[None, :, :]) ** 2
    return np.exp(-(sq * a[None, :, :]).sum(axis=2)) @ HARTMAN_OMEGA


def hartman3_raw(x: np.ndarray) -> np.ndarray:
    return _hartman_raw(x, HARTMAN3_A, HARTMAN3_P)


def hartman6_raw(x: np.ndarray) -> np.ndarray:
    return _hartman_raw(x, HARTMAN6_A, HARTMAN6_P)


def shekel_raw(x: np.ndarray) -> np.ndarray:
    sq = ((x[:, :, None] - SHEKEL_B[None, :, :]) ** 2).sum(axis=1)  # (n, 10)
    return (1.0 / (SHEKEL_OMEGA[None, :] + sq)).sum(axis=1)


def michalewicz_printed_raw(x: np.ndarray) -> np.ndarray:
    """Literal signed form; its maximum over [0, pi]^5 is the degenerate 0."""
    i = np.arange(1, x.shape[1] + 1)
    return -(np.sin(x) * np.sin(i * x**2 / np.pi) ** 20).sum(axis=1)


def michalewicz_raw(x: np.ndarray) -> np.ndarray:
    """Conventional maximization form (negated), with a nontrivial optimum."""
    return -michalewicz_printed_raw(x)


# ---------------------------------------------------------------------------
# Tabulated surrogates
# ---------------------------------------------------------------------------

def _scan_max(
    raw: Callable[[np.ndarray], np.ndarray],
    domain: BoxDomain,
    probes: int = 1 << 13,
    seed: int = 0,
) -> tuple[float, np.ndarray]:
    """Quasi-random sweep plus pattern polish for the objective maximum."""
    cfg = OptimizerConfig(grid_candidates=probes, multistarts=8, local_steps=60, seed=seed)
    arg = maximize(raw, domain, cfg)
    return float(raw(np.atleast_2d(arg))[0]), arg


def load_surrogate(path, kernel: KernelConfig | None = None, name: str | None = None) -> Benchmark:
    """Benchmark whose oracle is the GP-regression mean over a CSV table.

    Expects a UTF-8 CSV with header ``x1,...,xd,y`` and at least three
    distinct rows.  The box is the coordinatewise hull of the inputs and
    the recorded maximum comes from a dense scan of the fitted mean.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty surrogate file")
        d = len(header) - 1
        expected = [f"x{i}" for i in range(1, d + 1)] + ["y"]
        if d < 1 or [h.strip().lower() for h in header] != expected:
            raise ValueError(f"{path}: header must be x1,...,xd,y, got {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + 1:
                raise ValueError(f"{path}:{lineno}: expected {d + 1} fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-numeric field") from exc
    if len(rows) < 3:
        raise ValueError(f"{path}: need at least 3 data rows, got {len(rows)}")
    table = np.asarray(rows)
    inputs, outputs = table[:, :d], table[:, d]
    domain = BoxDomain(inputs.min(axis=0), inputs.max(axis=0))
    if kernel is None:
        kernel = KernelConfig(width=0.01 * float(domain.sides.sum()))
    gp = fit(ObservationSet(inputs, outputs), kernel)  # rejects duplicate rows

    def surrogate_mean(x: np.ndarray) -> np.ndarray:
        means, _ = predict_batch(gp, x)
        return means

    global_max, arg = _scan_max(surrogate_mean, domain)
    return Benchmark(
        name=name or path.stem,
        domain=domain,
        _raw=surrogate_mean,
        global_max=global_max,
        argmax=arg,
    )


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

_UNIT_SQUARE = BoxDomain([0.0, 0.0], [1.0, 1.0])

_SYNTHETIC = {
    "cosines": (cosines_raw, _UNIT_SQUARE, 1.6, np.array([0.3125, 0.3125])),
    "rosenbrock": (rosenbrock_raw, _UNIT_SQUARE, 10.0, np.array([1.0, 1.0])),
    "hartman3": (
        hartman3_raw,
        BoxDomain(np.zeros(3), np.ones(3)),
        3.862779787332662,
        np.array([0.11458884584283628, 0.5556488949101053, 0.8525469842761851]),
    ),
    "hartman6": (
        hartman6_raw,
        BoxDomain(np.zeros(6), np.ones(6)),
        3.3223680114155125,
        np.array([
            0.20168950803302935, 0.15001068716336596, 0.47687397197923015,
            0.2753324236620736, 0.31165161302551786, 0.6573005344338712,
        ]),
    ),
    "shekel": (
        shekel_raw,
        BoxDomain(np.full(4, 3.0), np.full(4, 6.0)),
        10.536409816692043,
        np.array([
            4.000746530075011, 4.000592929590026, 3.999663398214222, 3.9995097977422858,
        ]),
    ),
    "michalewicz": (
        michalewicz_raw,
        BoxDomain(np.zeros(5), np.full(5, np.pi)),
        4.6876581790881335,
        np.array([
            2.2029055167377827, 1.5707963227426234, 1.284991564815326,
            1.9230584648247415, 1.7204697678964767,
        ]),
    ),
    "michalewicz-printed": (
        michalewicz_printed_raw,
        BoxDomain(np.zeros(5), np.full(5, np.pi)),
        0.0,
        np.zeros(5),
    ),
}

_SURROGATE_DATA = {"fuelcell": "fuelcell_sim.csv", "hydrogen": "hydrogen_sim.csv"}

_cache: dict[str, Benchmark] = {}


def benchmark_names() -> list[str]:
    """Names accepted by :func:`get_benchmark` (experiment-grade only)."""
    return ["cosines", "hydrogen", "fuelcell", "rosenbrock", "hartman3", "michalewicz", "shekel", "hartman6"]


def get_benchmark(name: str) -> Benchmark:
    key = name.lower()
    if key in _cache:
        return _cache[key]
    if key in _SYNTHETIC:
        raw, domain, global_max, arg = _SYNTHETIC[key]
        bench = Benchmark(name=key, domain=domain, _raw=raw, global_max=global_max, argmax=arg)
    elif key in _SURROGATE_DATA:
        ref = resources.files("hybridbo.data").joinpath(_SURROGATE_DATA[key])
        with resources.as_file(ref) as path:
            bench = load_surrogate(path, name=key)
    else:
        known = sorted(set(_SYNTHETIC) | set(_SURROGATE_DATA))
        raise KeyError(f"unknown benchmark {name!r}; known: {', '.join(known)}")
    _cache[key] = bench
    return bench
