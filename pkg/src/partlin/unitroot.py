"""AR(1) fitting and a simulation based unit root test.

The model is z_t = rho z_{t-1} + e_t with no intercept and no trend.
The test statistic is the t ratio of rho against 1; its null law is
nonstandard, so p-values come from simulating pure random walks with
the package generator rather than from a table.  The p-value is the
left tail fraction, matching the rejection direction of the test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .rng import standard_normal


@dataclass(frozen=True)
class DfResult:
    rho_hat: float
    t_stat: float
    p_value: float
    sim_reps: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_value <= 1.0:
            raise ParameterError(f"p_value outside [0, 1]: {self.p_value}")


def _ols_pieces(z: np.ndarray) -> tuple[float, float]:
    """No-intercept AR(1) slope and its standard error."""
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or z.size < 3:
        raise ParameterError("need a 1-d series of length >= 3")
    if not np.all(np.isfinite(z)):
        raise ParameterError("series contains non-finite values")
    lag = z[:-1]
    cur = z[1:]
    sxx = float(lag @ lag)
    if sxx == 0.0:
        raise ParameterError("lagged series is identically zero")
    rho = float(lag @ cur) / sxx
    resid = cur - rho * lag
    dof = cur.size - 1
    s2 = float(resid @ resid) / dof
    return rho, float(np.sqrt(s2 / sxx))


def fit_ar1(z: np.ndarray) -> float:
    """Least squares slope of z_t on z_{t-1} through the origin."""
    rho, _ = _ols_pieces(z)
    return rho


def df_statistic(z: np.ndarray) -> float:
    """t ratio (rho_hat - 1) / se(rho_hat)."""
    rho, se = _ols_pieces(z)
    if se == 0.0:
        raise ParameterError(
            "zero residual variance, the series is deterministic"
        )
    return (rho - 1.0) / se


def _simulated_t(n: int, reps: int, seed: int) -> np.ndarray:
    """DF t draws under the null, one substream per simulated path."""
    paths = np.empty((reps, n))
    for r in range(reps):
        paths[r] = np.cumsum(standard_normal(seed, r, n))
    lag = paths[:, :-1]
    cur = paths[:, 1:]
    sxx = np.einsum("ij,ij->i", lag, lag)
    sxy = np.einsum("ij,ij->i", lag, cur)
    syy = np.einsum("ij,ij->i", cur, cur)
    rho = sxy / sxx
    rss = syy - sxy * sxy / sxx
    dof = n - 2
    se = np.sqrt(rss / dof / sxx)
    return (rho - 1.0) / se


def simulated_pvalue(t_stat: float, n: int, reps: int, seed: int) -> float:
    """Left tail fraction of simulated null t statistics at or below
    the observed one.

    The null draws are random walks of length ``n`` with standard
    Gaussian increments; path r uses stream r of ``seed``, so the
    p-value is deterministic given the seed and monotone in ``t_stat``.
    """
    if not np.isfinite(t_stat):
        raise ParameterError(f"t_stat must be finite, got {t_stat}")
    if n < 3:
        raise ParameterError(f"n must be >= 3, got {n}")
    if reps < 100:
        raise ParameterError(f"reps must be >= 100, got {reps}")
    t_sim = _simulated_t(n, reps, seed)
    return float(np.count_nonzero(t_sim <= t_stat)) / reps


def df_test(z: np.ndarray, reps: int = 2000, seed: int = 0) -> DfResult:
    """Fit, statistic and simulated p-value in one call.

    The null simulation uses the observed series length.
    """
    z = np.asarray(z, dtype=float)
    rho, _ = _ols_pieces(z)
    t = df_statistic(z)
    p = simulated_pvalue(t, z.size, reps, seed)
    return DfResult(rho_hat=rho, t_stat=t, p_value=p, sim_reps=reps)
