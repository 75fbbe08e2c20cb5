"""Replication engine for the simulation study.

One experiment cell fixes a sample size and a regressor design, then
replicates: draw a covariate random walk, independent standard normal
regressor noise, an AR(1) error, assemble y = x theta0 + g0(v) + eps,
fit the truncated estimator, and aggregate either the coefficient error
(the first table) or the curve error on a per replication grid (the
second table).  Distributional diagnostics for the two limit laws ride
on the same machinery.

Determinism: replication j draws from streams 4j, 4j+1, 4j+2 of the
master seed (walk, regressor noise, error innovations; one spare), so a
replication is a pure function of (master_seed, j).  Results are
aggregated in replication order no matter which process computed them,
which makes output bit identical across worker counts.

The bandwidth for a cell is either given explicitly or, with kernel set
to "cv", calibrated once by cross validation on a pilot replication
(stream block ``reps``, outside every replication's blocks) and then
frozen for all replications.  Per replication selection would multiply
the cost by the grid size for little benefit.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .bandwidth import cv_select, default_h_grid
from .dataset import TimeSeriesDataset
from .errors import (
    ExperimentError,
    NoVisitsError,
    ParameterError,
    RankError,
    TruncationError,
)
from .kernel import (
    KERNEL_L2,
    KernelSpec,
    TruncationSpec,
    default_truncation,
)
from .markov import simulate_ar1, simulate_random_walk
from .rng import standard_normal
from .sls import asymptotic_ci, estimate_g, truncated_sls

STREAMS_PER_REP = 4
DGPS = ("H_zero", "H_identity")
G0_TAGS = ("identity", "zero")
_FIT_ERRORS = (RankError, TruncationError, NoVisitsError)


@dataclass(frozen=True)
class McConfig:
    """Parameters of one experiment cell."""

    n: int
    reps: int
    dgp: str
    theta0: float = 1.0
    g0: str = "identity"
    increment_sd: float = 0.1
    eps_rho: float = 0.5
    eps_sd: float = 1.0
    master_seed: int = 0
    kernel: KernelSpec | str = "cv"
    trunc: TruncationSpec | None = None
    g_grid_points: int = 300
    workers: int = 1

    def __post_init__(self) -> None:
        if self.n < 10:
            raise ParameterError(f"n must be >= 10, got {self.n}")
        if self.reps < 1:
            raise ParameterError(f"reps must be >= 1, got {self.reps}")
        if self.dgp not in DGPS:
            raise ParameterError(f"dgp must be one of {DGPS}, got {self.dgp!r}")
        if self.g0 not in G0_TAGS:
            raise ParameterError(f"g0 must be one of {G0_TAGS}, got {self.g0!r}")
        for name in ("theta0", "increment_sd", "eps_rho", "eps_sd"):
            if not np.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if self.increment_sd < 0 or self.eps_sd < 0:
            raise ParameterError("standard deviations must be >= 0")
        if not isinstance(self.kernel, KernelSpec) and self.kernel != "cv":
            raise ParameterError('kernel must be a KernelSpec or the tag "cv"')
        if self.g_grid_points < 1:
            raise ParameterError("g_grid_points must be >= 1")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")


@dataclass(frozen=True)
class McCellResult:
    """Aggregate of one cell: mean absolute error and its spread.

    ``invalid_points`` counts grid points without kernel mass that were
    excluded from curve error averages (zero for coefficient cells).
    """

    ae: float
    se: float
    reps_used: int
    failures: int
    invalid_points: int = 0


@dataclass(frozen=True)
class ThetaDraws:
    """Per replication coefficient estimates and interval coverage."""

    draws: np.ndarray  # (reps_used, d)
    covered: np.ndarray  # (reps_used,) booleans, interval covers theta0
    ci_level: float
    reps_used: int
    failures: int


@dataclass(frozen=True)
class NormalityReport:
    n_draws: int
    mean_bias: float
    ks_distance: float
    ks_pvalue: float
    skewness: float
    excess_kurtosis: float


@dataclass(frozen=True)
class GCltReport:
    """Empirical vs theoretical variance of the local curve statistic."""

    variance: float
    target: float
    reps_used: int
    invalid: int
    failures: int


def _g0_values(tag: str, v: np.ndarray) -> np.ndarray:
    if tag == "identity":
        return v
    return np.zeros_like(v)


def simulate_replication(cfg: McConfig, rep: int) -> TimeSeriesDataset:
    """Deterministic dataset of replication ``rep`` under ``cfg``."""
    if rep < 0:
        raise ParameterError(f"rep must be >= 0, got {rep}")
    base = STREAMS_PER_REP * rep
    v = simulate_random_walk(cfg.n, cfg.increment_sd, 0.0, cfg.master_seed, base)
    u = standard_normal(cfg.master_seed, base + 1, cfg.n)
    eps = simulate_ar1(cfg.n, cfg.eps_rho, cfg.eps_sd, cfg.master_seed, base + 2)
    x = u if cfg.dgp == "H_zero" else v + u
    y = x * cfg.theta0 + _g0_values(cfg.g0, v) + eps
    return TimeSeriesDataset(y=y, x=x[:, None], v=v)


def resolve_truncation(cfg: McConfig) -> TruncationSpec:
    return cfg.trunc if cfg.trunc is not None else default_truncation(cfg.n)


def resolve_kernel(cfg: McConfig) -> KernelSpec:
    """The cell's kernel: as given, or pilot cross validation for "cv".

    The pilot replication index is ``cfg.reps``, whose stream block no
    ordinary replication touches, so calibration data and experiment
    data never share draws.
    """
    if isinstance(cfg.kernel, KernelSpec):
        return cfg.kernel
    pilot = simulate_replication(cfg, cfg.reps)
    res = cv_select(
        pilot, default_h_grid(cfg.n), "uniform", resolve_truncation(cfg)
    )
    return KernelSpec("uniform", res.h_star)


def table_grid(v: np.ndarray, points: int) -> np.ndarray:
    """Evaluation grid v_min + ((j-1)/points)(v_max - v_min), j = 1..points.

    The upper endpoint itself is deliberately not a grid point.
    """
    if points < 1:
        raise ParameterError(f"points must be >= 1, got {points}")
    v = np.asarray(v, dtype=float)
    lo = float(v.min())
    hi = float(v.max())
    return lo + (np.arange(points) / points) * (hi - lo)


def _replicate(args: tuple) -> tuple:
    """Worker for one replication; must stay module level for pickling."""
    cfg, kspec, trunc, rep, mode, v_point, ci_level = args
    try:
        ds = simulate_replication(cfg, rep)
        fit = truncated_sls(ds, kspec, trunc)
    except _FIT_ERRORS:
        return (rep, None)
    if mode == "theta":
        covered = np.nan
        if ci_level is not None:
            try:
                ci = asymptotic_ci(fit, ci_level)
                covered = float(ci[0, 0] <= cfg.theta0 <= ci[0, 1])
            except ParameterError:
                covered = np.nan
        return (rep, (fit.theta_hat, covered))
    if mode == "g":
        grid = table_grid(ds.v, cfg.g_grid_points)
        curve = estimate_g(ds, fit.theta_hat, grid, kspec)
        err = np.abs(curve.values - _g0_values(cfg.g0, grid))
        n_valid = int(np.count_nonzero(curve.valid))
        if n_valid == 0:
            return (rep, None)
        ae = float(np.mean(err[curve.valid]))
        return (rep, (ae, grid.size - n_valid))
    if mode == "gpoint":
        curve = estimate_g(ds, fit.theta_hat, np.array([v_point]), kspec)
        if not curve.valid[0]:
            return (rep, (np.nan, 1))
        g0v = float(_g0_values(cfg.g0, np.array([v_point]))[0])
        s = float(np.sqrt(curve.local_mass[0]) * (curve.values[0] - g0v))
        return (rep, (s, 0))
    raise ParameterError(f"unknown replication mode {mode!r}")


def _run_all(cfg: McConfig, mode: str, v_point=None, ci_level=None) -> list:
    kspec = resolve_kernel(cfg)
    trunc = resolve_truncation(cfg)
    payloads = [
        (cfg, kspec, trunc, rep, mode, v_point, ci_level)
        for rep in range(cfg.reps)
    ]
    if cfg.workers == 1 or cfg.reps < 2:
        results = [_replicate(p) for p in payloads]
    else:
        chunk = max(1, cfg.reps // (4 * cfg.workers))
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_replicate, payloads, chunksize=chunk))
    results.sort(key=lambda r: r[0])  # replication order, not completion order
    return [payload for _, payload in results]


def _check_failures(cfg: McConfig, failures: int) -> None:
    if failures > 0.1 * cfg.reps:
        raise ExperimentError(
            f"{failures} of {cfg.reps} replications failed, "
            "more than the 10% tolerance"
        )


def theta_experiment_details(cfg: McConfig, ci_level: float = 0.95) -> ThetaDraws:
    """Coefficient draws and interval coverage for every replication."""
    out = _run_all(cfg, "theta", ci_level=ci_level)
    kept = [r for r in out if r is not None]
    failures = cfg.reps - len(kept)
    _check_failures(cfg, failures)
    if not kept:
        raise ExperimentError("no replication produced a fit")
    draws = np.vstack([theta for theta, _ in kept])
    covered = np.array([c for _, c in kept])
    return ThetaDraws(
        draws=draws,
        covered=covered,
        ci_level=ci_level,
        reps_used=len(kept),
        failures=failures,
    )


def _spread(values: np.ndarray) -> float:
    return float(np.std(values, ddof=1)) if values.size > 1 else 0.0


def run_theta_experiment(cfg: McConfig) -> McCellResult:
    """Mean absolute coefficient error and spread over replications."""
    details = theta_experiment_details(cfg, ci_level=None)
    first = details.draws[:, 0]
    return McCellResult(
        ae=float(np.mean(np.abs(first - cfg.theta0))),
        se=_spread(first),
        reps_used=details.reps_used,
        failures=details.failures,
    )


def run_g_experiment(cfg: McConfig) -> McCellResult:
    """Mean absolute curve error on per replication grids.

    Each replication's grid is rebuilt from its own covariate range;
    grid points with no kernel mass are excluded from that
    replication's average and tallied in ``invalid_points``.
    """
    out = _run_all(cfg, "g")
    kept = [r for r in out if r is not None]
    failures = cfg.reps - len(kept)
    _check_failures(cfg, failures)
    if not kept:
        raise ExperimentError("no replication produced a fit")
    aes = np.array([ae for ae, _ in kept])
    invalid = int(sum(k for _, k in kept))
    return McCellResult(
        ae=float(np.mean(aes)),
        se=_spread(aes),
        reps_used=len(kept),
        failures=failures,
        invalid_points=invalid,
    )


def normality_check(theta_draws: np.ndarray, theta0: float) -> NormalityReport:
    """Distributional diagnostics of standardized coefficient draws.

    Standardization uses the empirical mean and standard deviation, so
    the test is against the normal family rather than one fixed normal.
    """
    draws = np.asarray(theta_draws, dtype=float).ravel()
    if draws.size < 200:
        raise ParameterError(
            f"need at least 200 draws for a stable diagnostic, got {draws.size}"
        )
    sd = float(np.std(draws, ddof=1))
    if sd == 0.0 or not np.isfinite(sd):
        raise ExperimentError("draws are degenerate (zero spread)")
    z = (draws - draws.mean()) / sd
    ks = stats.kstest(z, "norm")
    return NormalityReport(
        n_draws=int(draws.size),
        mean_bias=float(draws.mean() - theta0),
        ks_distance=float(ks.statistic),
        ks_pvalue=float(ks.pvalue),
        skewness=float(stats.skew(z)),
        excess_kurtosis=float(stats.kurtosis(z)),
    )


def g_clt_check(cfg: McConfig, v_point: float) -> GCltReport:
    """Variance check of the local limit law of the curve estimate.

    Per replication records sqrt(local mass) times the curve error at
    ``v_point`` and compares the empirical variance with the stationary
    error variance times the squared kernel integral.
    """
    if not np.isfinite(v_point):
        raise ParameterError(f"v_point must be finite, got {v_point}")
    if abs(cfg.eps_rho) >= 1:
        raise ParameterError(
            "no stationary error variance for |eps_rho| >= 1"
        )
    kspec = resolve_kernel(cfg)
    out = _run_all(
        replace(cfg, kernel=kspec), "gpoint", v_point=float(v_point)
    )
    kept = [r for r in out if r is not None]
    failures = cfg.reps - len(kept)
    _check_failures(cfg, failures)
    s_vals = np.array([s for s, _ in kept])
    invalid = int(sum(flag for _, flag in kept))
    if invalid > 0.2 * cfg.reps:
        raise ExperimentError(
            f"curve point invalid in {invalid} of {cfg.reps} replications"
        )
    s_vals = s_vals[np.isfinite(s_vals)]
    if s_vals.size < 2:
        raise ExperimentError("fewer than two usable replications")
    sigma_sq = cfg.eps_sd**2 / (1.0 - cfg.eps_rho**2)
    return GCltReport(
        variance=float(np.var(s_vals, ddof=1)),
        target=sigma_sq * KERNEL_L2[kspec.family],
        reps_used=int(s_vals.size),
        invalid=invalid,
        failures=failures,
    )


def emit_curve_data(cfg: McConfig, rep_seed: int, out: str) -> None:
    """Write one replication's true and estimated curve to a CSV file.

    Columns are the grid point, the true curve, the estimate and a 0/1
    validity flag; rows follow the per replication grid rule.
    """
    kspec = resolve_kernel(cfg)
    trunc = resolve_truncation(cfg)
    ds = simulate_replication(cfg, rep_seed)
    fit = truncated_sls(ds, kspec, trunc)
    grid = table_grid(ds.v, cfg.g_grid_points)
    curve = estimate_g(ds, fit.theta_hat, grid, kspec)
    g_true = _g0_values(cfg.g0, grid)
    with open(out, "w", newline="") as fh:
        fh.write("v,g_true,g_hat,valid\n")
        for i in range(grid.size):
            fh.write(
                "%.17g,%.17g,%.17g,%d\n"
                % (grid[i], g_true[i], curve.values[i], int(curve.valid[i]))
            )
