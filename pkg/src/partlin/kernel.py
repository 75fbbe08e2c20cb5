"""Kernel weights, local mass, density truncation and smoothing.

Everything here reduces to window sums: for evaluation points p_i and
sample points v_t, accumulate K((v_t - p_i)/h) and the same sums against
target columns.  Two evaluation strategies produce identical numbers:

``direct``
    materialise the full kernel matrix (in chunks of evaluation points),
    which works for any kernel family;

``windowed``
    for the uniform kernel only, sort the sample once and read window
    sums off prefix sums, O((n + p) log n) instead of O(n p).

``auto`` picks ``windowed`` for the uniform kernel and ``direct``
otherwise.  Both paths must agree to near machine precision; the test
suite pins that down.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log

import numpy as np

from .errors import NoVisitsError, ParameterError
from .markov import SmallSet, count_small_set_visits

FAMILIES = ("uniform", "epanechnikov")
METHODS = ("auto", "windowed", "direct")

# kernel value at 0, used by leave-one-out corrections
KERNEL_AT_ZERO = {"uniform": 0.5, "epanechnikov": 0.75}
# integral of the squared kernel, the scale in the pointwise limit law
KERNEL_L2 = {"uniform": 0.5, "epanechnikov": 0.6}

_CHUNK_BUDGET = 2**22  # direct path: cap on kernel matrix entries per chunk


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family plus a bandwidth h > 0."""

    family: str
    bandwidth: float

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ParameterError(
                f"unknown kernel family {self.family!r}, expected one of {FAMILIES}"
            )
        h = self.bandwidth
        if not np.isfinite(h) or h <= 0:
            raise ParameterError(f"bandwidth must be finite and > 0, got {h}")


@dataclass(frozen=True)
class TruncationSpec:
    """Density floor b_n and the small set used to count regenerations."""

    b_n: float
    small_set: SmallSet

    def __post_init__(self) -> None:
        if not np.isfinite(self.b_n) or self.b_n < 0:
            raise ParameterError(f"b_n must be finite and >= 0, got {self.b_n}")


def kernel_eval(spec: KernelSpec, u: np.ndarray | float) -> np.ndarray | float:
    """Evaluate the kernel at standardised distance(s) u."""
    arr = np.asarray(u, dtype=float)
    inside = np.abs(arr) <= 1.0
    if spec.family == "uniform":
        out = np.where(inside, 0.5, 0.0)
    else:
        out = np.where(inside, 0.75 * (1.0 - arr * arr), 0.0)
    return float(out) if np.isscalar(u) else out


def default_bandwidth(n: int, scale: float = 1.0, rate: float = 0.25) -> float:
    """Rule of thumb bandwidth scale * n**(-rate)."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if scale <= 0 or not 0 < rate < 1:
        raise ParameterError("need scale > 0 and 0 < rate < 1")
    return scale * float(n) ** -rate


def default_density_floor(n: int, scale: float = 0.05) -> float:
    """Slowly vanishing truncation level scale / log n (needs n >= 2)."""
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if scale < 0:
        raise ParameterError(f"scale must be >= 0, got {scale}")
    return scale / log(n)


DEFAULT_SMALL_SET = SmallSet(-1.0, 1.0)


def default_truncation(n: int) -> TruncationSpec:
    return TruncationSpec(default_density_floor(n), DEFAULT_SMALL_SET)


def _window_sums(
    sample: np.ndarray,
    points: np.ndarray,
    spec: KernelSpec,
    targets: np.ndarray | None,
    method: str = "auto",
) -> tuple[np.ndarray, np.ndarray | None]:
    """Kernel mass and kernel weighted target sums at each point.

    Returns ``(mass, sums)`` where ``mass[i] = sum_t K((v_t - p_i)/h)``
    and ``sums[i, j] = sum_t K((v_t - p_i)/h) * targets[t, j]`` (None
    when no targets are passed).  Kernel values are unscaled by 1/h.
    """
    if method not in METHODS:
        raise ParameterError(f"unknown method {method!r}, expected {METHODS}")
    sample = np.asarray(sample, dtype=float)
    points = np.asarray(points, dtype=float)
    h = spec.bandwidth
    if method == "auto":
        method = "windowed" if spec.family == "uniform" else "direct"
    if method == "windowed" and spec.family != "uniform":
        raise ParameterError("the windowed path only supports the uniform kernel")

    if method == "windowed":
        order = np.argsort(sample, kind="stable")
        sv = sample[order]
        lo = np.searchsorted(sv, points - h, side="left")
        hi = np.searchsorted(sv, points + h, side="right")
        mass = 0.5 * (hi - lo)
        if targets is None:
            return mass, None
        tg = targets[order]
        pref = np.vstack([np.zeros(tg.shape[1]), np.cumsum(tg, axis=0)])
        return mass, 0.5 * (pref[hi] - pref[lo])

    mass = np.empty(points.size)
    sums = None if targets is None else np.empty((points.size, targets.shape[1]))
    step = max(1, _CHUNK_BUDGET // max(1, sample.size))
    for start in range(0, points.size, step):
        chunk = points[start : start + step]
        k = kernel_eval(spec, (sample[None, :] - chunk[:, None]) / h)
        mass[start : start + len(chunk)] = k.sum(axis=1)
        if targets is not None:
            sums[start : start + len(chunk)] = k @ targets
    return mass, sums


def weights(
    v_series: np.ndarray, v: float, spec: KernelSpec
) -> np.ndarray | None:
    """Normalised kernel weights of every sample point at location v.

    Returns None when no sample point falls in the window (the weights
    are undefined there, and None is deliberately distinct from any
    weight vector).  Otherwise the weights are nonnegative and sum to 1.
    """
    v_series = np.asarray(v_series, dtype=float)
    k = kernel_eval(spec, (v_series - v) / spec.bandwidth)
    total = k.sum()
    if total <= 0.0:
        return None
    return k / total


def density_pn(
    v_series: np.ndarray, v: float, spec: KernelSpec, n_blocks: int
) -> float:
    """Occupation density estimate: kernel mass over n_blocks * h.

    The normaliser is the regeneration count rather than n, which is
    what makes the estimate stable under null recurrence.
    """
    if n_blocks < 1:
        raise ParameterError(f"n_blocks must be >= 1, got {n_blocks}")
    v_series = np.asarray(v_series, dtype=float)
    k = kernel_eval(spec, (v_series - v) / spec.bandwidth)
    return float(k.sum() / (n_blocks * spec.bandwidth))


def truncation_mask(
    v_series: np.ndarray,
    spec: KernelSpec,
    trunc: TruncationSpec,
    method: str = "auto",
) -> np.ndarray:
    """Boolean mask keeping observations where the occupation density
    estimate at their own covariate value exceeds the floor.

    The density normaliser is the small set visit count of the path; a
    path with no visits has no usable normaliser and raises.
    """
    v_series = np.asarray(v_series, dtype=float)
    visits = count_small_set_visits(v_series, trunc.small_set)
    if visits == 0:
        raise NoVisitsError("the path never enters the small set")
    mass, _ = _window_sums(v_series, v_series, spec, None, method)
    dens = mass / (visits * spec.bandwidth)
    return dens > trunc.b_n


def smooth(
    v_series: np.ndarray,
    targets: np.ndarray,
    spec: KernelSpec,
    method: str = "auto",
) -> tuple[np.ndarray, np.ndarray]:
    """Kernel regression of each target column on the covariate,
    evaluated at the sample points themselves.

    Returns ``(smoothed, valid)``.  ``smoothed`` has the shape of
    ``targets``; rows where the kernel mass vanishes are NaN and flagged
    False in ``valid``.  With a kernel that is positive at 0 every point
    lies in its own window, so ``valid`` is all True for those families.
    """
    v_series = np.asarray(v_series, dtype=float)
    targets = np.asarray(targets, dtype=float)
    squeeze = targets.ndim == 1
    tg = targets[:, None] if squeeze else targets
    if tg.shape[0] != v_series.size:
        raise ParameterError(
            f"targets rows {tg.shape[0]} do not match n = {v_series.size}"
        )
    mass, sums = _window_sums(v_series, v_series, spec, tg, method)
    valid = mass > 0.0
    out = np.full(tg.shape, np.nan)
    out[valid] = sums[valid] / mass[valid, None]
    return (out[:, 0] if squeeze else out), valid
