"""Shared builders for the test suite.

Everything here is deterministic given its arguments.  Tiny fixtures for
oracle comparisons use the stdlib Mersenne generator on purpose, so the
test inputs do not depend on the package's own stream construction.
"""

from __future__ import annotations

import random

import numpy as np

from partlin import TimeSeriesDataset
from partlin.markov import simulate_ar1, simulate_random_walk
from partlin.rng import standard_normal


def build_dataset(
    seed: int = 7,
    n: int = 300,
    theta0: float = 1.0,
    rho: float = 0.5,
    d: int = 1,
    dgp: str = "H_zero",
    eps_sd: float = 1.0,
    g_identity: bool = True,
) -> TimeSeriesDataset:
    """A dataset from the simulation design, with an optional extra column."""
    v = simulate_random_walk(n, 0.1, 0.0, seed, 0)
    u = standard_normal(seed, 1, n * d).reshape(n, d)
    x = u if dgp == "H_zero" else v[:, None] + u
    eps = simulate_ar1(n, rho, eps_sd, seed, 2)
    g = v if g_identity else np.zeros(n)
    y = x @ np.full(d, theta0) + g + eps
    return TimeSeriesDataset(y=y, x=x, v=v)


def tiny_fixture(rng: random.Random, n: int | None = None, d: int | None = None):
    """One small comparison case: data plus kernel and truncation settings.

    The covariate always has at least one point inside [-1, 1], so the
    visit count normalising the density floor is positive.  Bandwidths
    are large relative to the covariate spread, keeping leave-one-out
    windows populated for most draws.
    """
    n = n if n is not None else rng.randint(4, 8)
    d = d if d is not None else rng.choice([1, 1, 2])
    v = [rng.uniform(-2.0, 2.0) for _ in range(n)]
    v[rng.randrange(n)] = rng.uniform(-0.9, 0.9)
    x = [[rng.uniform(-2.0, 2.0) for _ in range(d)] for _ in range(n)]
    y = [rng.uniform(-2.0, 2.0) for _ in range(n)]
    family = rng.choice(["uniform", "epanechnikov"])
    h = rng.uniform(0.8, 2.5)
    bn = rng.uniform(0.0, 0.3)
    return y, x, v, family, h, bn, -1.0, 1.0


def as_dataset(y, x, v) -> TimeSeriesDataset:
    return TimeSeriesDataset(
        y=np.asarray(y, dtype=float),
        x=np.asarray(x, dtype=float),
        v=np.asarray(v, dtype=float),
    )
