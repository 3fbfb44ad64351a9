"""Shared builders for randomized model instances used across test modules."""

import numpy as np
import pytest

from hybridbo import BoxDomain, GpPosterior, KernelConfig, ObservationSet, fit


def make_random_gp(
    seed: int,
    d: int | None = None,
    n: int | None = None,
    width: float | None = None,
) -> GpPosterior:
    """Well-conditioned random posterior on the unit box."""
    rng = np.random.default_rng(seed)
    d = d or int(rng.integers(1, 4))
    n = n or int(rng.integers(2, 9))
    width = width or d * 10 ** rng.uniform(-1.3, -0.3)
    # rejection keeps the points separated so the Gram stays well-conditioned
    points = [rng.uniform(size=d)]
    while len(points) < n:
        z = rng.uniform(size=d)
        if min(np.linalg.norm(z - p) for p in points) > 0.08:
            points.append(z)
    x = np.asarray(points)
    y = rng.uniform(size=n)
    return fit(ObservationSet(x, y), KernelConfig(width=width))


def far_point(gp: GpPosterior, rng: np.random.Generator, clearance: float = 0.05) -> np.ndarray:
    """A point in the unit box at least ``clearance`` from every observation."""
    for _ in range(10_000):
        z = rng.uniform(size=gp.dimension)
        if min(np.linalg.norm(z - p) for p in gp.observations.inputs) > clearance:
            return z
    raise RuntimeError("could not place a separated point")


@pytest.fixture
def unit_square() -> BoxDomain:
    return BoxDomain([0.0, 0.0], [1.0, 1.0])
