"""Semi-parametric least squares in the partially linear model.

The model is y_t = x_t' theta + g(v_t) + eps_t with g unknown.  Both
estimators first remove the covariate trend from y and from every
regressor column by kernel smoothing at the sample points, then regress
the detrended response on the detrended regressors:

``naive_sls``
    plain least squares on all detrended rows;

``truncated_sls``
    weighted least squares keeping only rows whose occupation density
    estimate clears a floor, which screens out covariate regions visited
    too rarely for the smoother to be reliable.  This is the estimator
    with a tractable limit law under null recurrence.

Given any theta, the curve estimate ``estimate_g`` smooths y - x' theta
on the covariate.  Standard errors come from a lag window long run
covariance of the residual pairs (eps_t, u_t), u_t the detrended
regressor row, because eps is serially correlated while theta's limit
variance involves the cross products of both autocovariance sequences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import ndtri

from .dataset import TimeSeriesDataset
from .errors import ParameterError, RankError, TruncationError
from .kernel import KernelSpec, TruncationSpec, _window_sums, smooth, truncation_mask
from .markov import estimate_beta

_COND_LIMIT = 1e12


@dataclass(frozen=True)
class LongRunCovariance:
    """Plug-in pieces of the limit variance of the linear coefficients."""

    sigma_hat_sq: float
    sigma_u: np.ndarray
    sigma_eps_u: np.ndarray
    psd_projected: bool


@dataclass(frozen=True)
class SlsFit:
    """Truncated fit with its diagnostics.

    ``avar`` is the sandwich estimate of the limit covariance of
    sqrt(n) (theta_hat - theta); it is all NaN when the detrended second
    moment matrix is too ill conditioned to invert for the sandwich,
    even though theta_hat itself was solvable.
    """

    theta_hat: np.ndarray
    mask: np.ndarray
    effective_n: int
    n: int
    n_blocks: int
    beta_hat: float
    sigma_hat_sq: float
    sigma_u: np.ndarray
    sigma_eps_u: np.ndarray
    avar: np.ndarray
    psd_projected: bool
    kernel: KernelSpec
    truncation: TruncationSpec


class ResidualSet(NamedTuple):
    eps_hat: np.ndarray
    u_hat: np.ndarray
    valid: np.ndarray


@dataclass(frozen=True)
class CurveEstimate:
    """A curve evaluated on a grid, with the local kernel mass.

    ``local_mass[i]`` is the raw kernel sum at grid point i; points with
    zero mass carry NaN values and are flagged invalid rather than
    raising, since sparse outer grid regions are expected under null
    recurrence.
    """

    grid: np.ndarray
    values: np.ndarray
    local_mass: np.ndarray
    valid: np.ndarray


def _detrend(
    ds: TimeSeriesDataset, spec: KernelSpec, method: str = "auto"
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Remove the covariate trend from y and x at the sample points."""
    stacked = np.column_stack([ds.y, ds.x])
    smoothed, valid = smooth(ds.v, stacked, spec, method)
    tilde = stacked - smoothed
    return tilde[:, 0], tilde[:, 1:], valid


def _solve_normal(
    xt: np.ndarray, yt: np.ndarray, rows: np.ndarray | None, x_ref: np.ndarray
) -> np.ndarray:
    if rows is not None:
        xt = xt[rows]
        yt = yt[rows]
        x_ref = x_ref[rows]
    a = xt.T @ xt
    b = xt.T @ yt
    # a column with no variation around its covariate trend detrends to
    # roundoff noise; its normal-equation diagonal is then far below the
    # raw column scale and the solve would amplify garbage
    ref = np.maximum((x_ref * x_ref).sum(axis=0), np.finfo(float).tiny)
    if np.any(np.diag(a) <= 1e-24 * ref):
        raise RankError(
            "a detrended regressor column is numerically zero, "
            "the coefficient on it is not identified"
        )
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise RankError(
            f"detrended design is numerically singular (condition {cond:.3e})"
        )
    return np.linalg.solve(a, b)


def naive_sls(
    ds: TimeSeriesDataset, spec: KernelSpec, method: str = "auto"
) -> np.ndarray:
    """Least squares on all detrended rows, no density truncation."""
    yt, xt, valid = _detrend(ds, spec, method)
    rows = None if valid.all() else valid
    return _solve_normal(xt, yt, rows, ds.x)


def truncated_theta(
    ds: TimeSeriesDataset,
    spec: KernelSpec,
    trunc: TruncationSpec,
    method: str = "auto",
) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients and the truncation mask, without fit diagnostics.

    This is the inner loop of bandwidth selection, where the covariance
    block of the full fit would be wasted work.
    """
    mask = truncation_mask(ds.v, spec, trunc, method)
    if not mask.any():
        raise TruncationError(
            f"density floor {trunc.b_n:g} removed all {ds.n} observations"
        )
    yt, xt, valid = _detrend(ds, spec, method)
    theta = _solve_normal(xt, yt, mask & valid, ds.x)
    return theta, mask


def residuals(
    ds: TimeSeriesDataset, theta: np.ndarray, spec: KernelSpec, method: str = "auto"
) -> ResidualSet:
    """Detrended residual pairs (eps_hat_t, u_hat_t) for a given theta.

    ``eps_hat = ytilde - xtilde' theta`` and ``u_hat = xtilde``.  Rows
    where smoothing had no mass (impossible for kernels positive at 0)
    are NaN and flagged False.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (ds.d,):
        raise ParameterError(f"theta must have shape ({ds.d},), got {theta.shape}")
    yt, xt, valid = _detrend(ds, spec, method)
    return ResidualSet(eps_hat=yt - xt @ theta, u_hat=xt, valid=valid)


def longrun_covariance(
    eps: np.ndarray, u: np.ndarray, max_lag: int
) -> LongRunCovariance:
    """Lag window estimate of the long run covariance pieces.

    With e the mean corrected eps and m pairs, the estimate is

        sigma_eps_u = var(e) * Sigma_u
                      + sum_{l=1}^{max_lag-1} (1 - l/max_lag) * gamma_e(l)
                        * (Gamma_u(l) + Gamma_u(l)')

    where gamma_e and Gamma_u are 1/m normalised autocovariances and
    Sigma_u = u'u / m.  The triangular taper keeps the scalar part
    positive; the symmetrised cross products keep the matrix symmetric,
    and any residual negative eigenvalue is clipped to zero with the
    ``psd_projected`` flag set.
    """
    eps = np.asarray(eps, dtype=float)
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    m = eps.size
    if u.shape[0] != m:
        raise ParameterError(f"eps has {m} rows, u has {u.shape[0]}")
    if max_lag < 0:
        raise ParameterError(f"max_lag must be >= 0, got {max_lag}")
    if m < max_lag + 2:
        raise ParameterError(
            f"need at least max_lag + 2 = {max_lag + 2} pairs, got {m}"
        )
    e = eps - eps.mean()
    sigma_hat_sq = float(e @ e) / m
    sigma_u = (u.T @ u) / m
    s = sigma_hat_sq * sigma_u
    for lag in range(1, max_lag):
        w = 1.0 - lag / max_lag
        gamma_e = float(e[:-lag] @ e[lag:]) / m
        gamma_u = (u[:-lag].T @ u[lag:]) / m
        s = s + w * gamma_e * (gamma_u + gamma_u.T)
    s = 0.5 * (s + s.T)
    vals, vecs = np.linalg.eigh(s)
    floor = -1e-12 * max(1.0, float(np.abs(vals).max(initial=0.0)))
    projected = bool(vals.min(initial=0.0) < floor)
    if vals.min(initial=0.0) < 0.0:
        s = (vecs * np.clip(vals, 0.0, None)) @ vecs.T
        s = 0.5 * (s + s.T)
    return LongRunCovariance(
        sigma_hat_sq=sigma_hat_sq,
        sigma_u=sigma_u,
        sigma_eps_u=s,
        psd_projected=projected,
    )


def default_max_lag(n: int) -> int:
    """Lag window width floor(n ** (1/3)).

    Computed in integers; the float cube root of a perfect cube can land
    just below the true value (1000 ** (1/3) rounds to 9.999...).
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    k = int(float(n) ** (1.0 / 3.0))
    while (k + 1) ** 3 <= n:
        k += 1
    while k**3 > n:
        k -= 1
    return k


def truncated_sls(
    ds: TimeSeriesDataset,
    spec: KernelSpec,
    trunc: TruncationSpec,
    method: str = "auto",
) -> SlsFit:
    """Density truncated fit with recurrence and covariance diagnostics.

    The long run covariance uses the residual pairs at every sample
    point (truncation affects which rows enter the normal equations,
    not where residuals exist), keeping the lag structure intact.
    """
    theta, mask = truncated_theta(ds, spec, trunc, method)
    res = residuals(ds, theta, spec, method)
    keep = res.valid
    cov = longrun_covariance(
        res.eps_hat[keep], res.u_hat[keep], default_max_lag(ds.n)
    )
    cond = np.linalg.cond(cov.sigma_u)
    if np.isfinite(cond) and cond <= _COND_LIMIT:
        half = np.linalg.solve(cov.sigma_u, cov.sigma_eps_u)
        avar = np.linalg.solve(cov.sigma_u, half.T).T
        avar = 0.5 * (avar + avar.T)
    else:
        avar = np.full((ds.d, ds.d), np.nan)
    visits = int(
        np.count_nonzero(trunc.small_set.contains(ds.v))
    )
    return SlsFit(
        theta_hat=theta,
        mask=mask,
        effective_n=int(mask.sum()),
        n=ds.n,
        n_blocks=visits,
        beta_hat=estimate_beta(ds.v, trunc.small_set),
        sigma_hat_sq=cov.sigma_hat_sq,
        sigma_u=cov.sigma_u,
        sigma_eps_u=cov.sigma_eps_u,
        avar=avar,
        psd_projected=cov.psd_projected,
        kernel=spec,
        truncation=trunc,
    )


def asymptotic_ci(fit: SlsFit, level: float) -> np.ndarray:
    """Normal theory confidence intervals for each linear coefficient.

    Returns an array of shape (d, 2).  ``level`` = 0 gives the
    degenerate interval at theta_hat; levels at or above 1 have no
    finite quantile and are rejected, as is a fit whose ``avar`` is NaN.
    """
    if not 0.0 <= level < 1.0:
        raise ParameterError(f"level must be in [0, 1), got {level}")
    if not np.all(np.isfinite(fit.avar)):
        raise ParameterError("fit has a non-finite avar, no interval available")
    z = float(ndtri(0.5 * (1.0 + level)))
    half = z * np.sqrt(np.diag(fit.avar) / fit.n)
    return np.column_stack([fit.theta_hat - half, fit.theta_hat + half])


def estimate_g(
    ds: TimeSeriesDataset,
    theta: np.ndarray,
    grid: np.ndarray,
    spec: KernelSpec,
    method: str = "auto",
) -> CurveEstimate:
    """Kernel estimate of the curve g on a grid, given theta.

    Smooths the partial residual y - x' theta.  Grid points with no
    sample mass get NaN and a False flag.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (ds.d,):
        raise ParameterError(f"theta must have shape ({ds.d},), got {theta.shape}")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise ParameterError("grid must be a nonempty 1-d array")
    target = (ds.y - ds.x @ theta)[:, None]
    mass, sums = _window_sums(ds.v, grid, spec, target, method)
    valid = mass > 0.0
    values = np.full(grid.size, np.nan)
    values[valid] = sums[valid, 0] / mass[valid]
    return CurveEstimate(grid=grid, values=values, local_mass=mass, valid=valid)


def estimate_h(
    ds: TimeSeriesDataset,
    grid: np.ndarray,
    spec: KernelSpec,
    method: str = "auto",
) -> list[CurveEstimate]:
    """Kernel regression of each regressor column on the covariate.

    These are the conditional mean curves subtracted from x during
    detrending, reported on a grid for inspection, one estimate per
    regressor column.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise ParameterError("grid must be a nonempty 1-d array")
    mass, sums = _window_sums(ds.v, grid, spec, ds.x, method)
    valid = mass > 0.0
    out = []
    for j in range(ds.d):
        values = np.full(grid.size, np.nan)
        values[valid] = sums[valid, j] / mass[valid]
        out.append(
            CurveEstimate(grid=grid, values=values, local_mass=mass, valid=valid)
        )
    return out
