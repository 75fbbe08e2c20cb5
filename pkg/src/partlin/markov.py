"""Covariate path simulation and recurrence diagnostics.

The covariate is modelled as a Harris recurrent Markov chain that is
null recurrent: it keeps returning to any fixed window, but the times
between returns have infinite mean, so only a fraction of the sample
(roughly n to the power of the recurrence index) falls inside a given
window.  The diagnostics here are built from visits to one designated
window, the small set: the visit count plays the role of the regeneration
count, its log ratio against log n estimates the recurrence index, and
splitting an additive functional at the visit times gives the block
decomposition that underlies the asymptotic theory for averages along
the path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.signal import lfilter

from .errors import NoVisitsError, ParameterError
from .rng import standard_normal


@dataclass(frozen=True)
class SmallSet:
    """A compact interval [lower, upper] used as the regeneration window."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise ParameterError("small set endpoints must be finite")
        if not self.lower < self.upper:
            raise ParameterError(
                f"small set needs lower < upper, got [{self.lower}, {self.upper}]"
            )

    def contains(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return (v >= self.lower) & (v <= self.upper)


def simulate_random_walk(
    n: int, increment_sd: float, v0: float, seed: int, stream: int = 0
) -> np.ndarray:
    """Gaussian random walk of length n started at ``v0``.

    The walk is the canonical example of a null recurrent chain with
    recurrence index 1/2.  ``increment_sd`` may be zero, which gives the
    constant path at ``v0``.
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if not np.isfinite(increment_sd) or increment_sd < 0:
        raise ParameterError(f"increment_sd must be >= 0, got {increment_sd}")
    steps = increment_sd * standard_normal(seed, stream, n)
    return v0 + np.cumsum(steps)


def simulate_ar1(
    n: int, rho: float, innovation_sd: float, seed: int, stream: int = 0
) -> np.ndarray:
    """Stationary AR(1) path e_t = rho e_{t-1} + innovation.

    For |rho| < 1 the first value is drawn from the stationary law, so
    every marginal has variance innovation_sd**2 / (1 - rho**2).  For
    |rho| >= 1 no stationary law exists and the recursion starts at 0.
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if not np.isfinite(innovation_sd) or innovation_sd < 0:
        raise ParameterError(
            f"innovation_sd must be >= 0, got {innovation_sd}"
        )
    if not np.isfinite(rho):
        raise ParameterError(f"rho must be finite, got {rho}")
    z = standard_normal(seed, stream, n + 1)
    if abs(rho) < 1:
        e0 = innovation_sd / np.sqrt(1.0 - rho * rho) * z[0]
    else:
        e0 = 0.0
    innov = innovation_sd * z[1:]
    out, _ = lfilter([1.0], [1.0, -rho], innov, zi=np.array([rho * e0]))
    return out


def count_small_set_visits(v: np.ndarray, small_set: SmallSet) -> int:
    """Number of sample points inside the small set."""
    return int(np.count_nonzero(small_set.contains(v)))


def estimate_beta(v: np.ndarray, small_set: SmallSet) -> float:
    """Recurrence index estimate log(visit count) / log(n).

    Requires n >= 2 (log 1 = 0 leaves the ratio undefined) and at least
    one visit.  For a Gaussian random walk the estimate concentrates
    near 1/2 as n grows; for a positive recurrent chain it approaches 1.
    """
    v = np.asarray(v, dtype=float)
    n = v.size
    if n < 2:
        raise ParameterError(f"need n >= 2 to estimate the index, got {n}")
    visits = count_small_set_visits(v, small_set)
    if visits == 0:
        raise NoVisitsError("the path never enters the small set")
    return float(np.log(visits) / np.log(n))


@dataclass(frozen=True)
class BlockDecomposition:
    """Additive functional split at the visit times of the small set.

    ``head`` collects the terms up to and including the first visit,
    ``blocks[k]`` the terms strictly after visit k up to and including
    visit k+1, and ``tail`` the terms after the last visit.  By
    construction head + sum(blocks) + tail equals the full sum, and the
    block sums are the (approximately independent) pieces whose count,
    not n, sets the convergence rate of averages along the path.
    """

    head: float
    blocks: np.ndarray
    tail: float
    boundaries: np.ndarray  # 0-based indices of the visits, increasing

    @property
    def n_complete(self) -> int:
        return int(self.blocks.size)


def _apply(f: Callable[[float], float], v: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(f(v), dtype=float)
    except (TypeError, ValueError):  # scalar-only callable
        out = None
    if out is None or out.shape != v.shape:
        out = np.fromiter((float(f(x)) for x in v), dtype=float, count=v.size)
    return out


def regeneration_blocks(
    v: np.ndarray,
    f: Callable[[float], float],
    small_set: SmallSet,
) -> BlockDecomposition:
    """Split sum(f(v_t)) into head, complete blocks and tail."""
    v = np.asarray(v, dtype=float)
    if v.size < 1:
        raise ParameterError("need at least one observation")
    visits = np.flatnonzero(small_set.contains(v))
    if visits.size == 0:
        raise NoVisitsError("the path never enters the small set")
    fv = _apply(f, v)
    cuts = np.concatenate(([0], visits + 1, [v.size]))
    sums = np.add.reduceat(
        np.concatenate((fv, [0.0])), cuts[:-1]
    )  # trailing 0 guards reduceat when the last cut hits v.size
    empty = cuts[:-1] == cuts[1:]
    sums = np.where(empty, 0.0, sums[: cuts.size - 1])
    return BlockDecomposition(
        head=float(sums[0]),
        blocks=np.asarray(sums[1:-1], dtype=float),
        tail=float(sums[-1]),
        boundaries=visits,
    )


def ergodic_ratio(
    v: np.ndarray,
    f: Callable[[float], float],
    small_set: SmallSet,
) -> float:
    """Sample sum of f along the path divided by the complete block count.

    This is the natural estimate of the limiting mean of f under the
    invariant measure, normalised by regenerations rather than by n.
    Needs at least two visits, otherwise there is no complete block.
    """
    dec = regeneration_blocks(v, f, small_set)
    if dec.n_complete == 0:
        raise NoVisitsError(
            "only one visit to the small set, no complete block to average"
        )
    total = dec.head + float(dec.blocks.sum()) + dec.tail
    return total / dec.n_complete
