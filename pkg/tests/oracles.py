"""Independent reference implementations used as test oracles.

Everything here is deliberately written in plain Python loops straight
from the defining formulas, sharing no code with the package: the
generator is a from-scratch Philox-4x64-10, normals come from the
standard library's inverse CDF, and the estimators are literal
weight-sum translations.  Slow is fine; these run on tiny fixtures.
"""

from __future__ import annotations

import math
from statistics import NormalDist

import numpy as np

_M64 = (1 << 64) - 1
_PHILOX_M0 = 0xD2E7470EE14C6C93
_PHILOX_M1 = 0xCA5A826395121157
_W0 = 0x9E3779B97F4A7C15
_W1 = 0xBB67AE8584CAA73B

_INV_CDF = NormalDist().inv_cdf


def _philox_block(counter: list[int], key: tuple[int, int]) -> list[int]:
    x = list(counter)
    k = list(key)
    for _ in range(10):
        p0 = _PHILOX_M0 * x[0]
        p1 = _PHILOX_M1 * x[2]
        hi0, lo0 = p0 >> 64, p0 & _M64
        hi1, lo1 = p1 >> 64, p1 & _M64
        x = [hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0]
        k = [(k[0] + _W0) & _M64, (k[1] + _W1) & _M64]
    return x


def oracle_raw64(seed: int, stream: int, count: int) -> list[int]:
    """Philox-4x64-10 words for key (seed, stream), counter bumped
    before each block (so the first block encrypts counter value 1)."""
    key = (seed & _M64, stream & _M64)
    counter = [0, 0, 0, 0]
    out: list[int] = []
    while len(out) < count:
        for i in range(4):
            counter[i] = (counter[i] + 1) & _M64
            if counter[i]:
                break
        out.extend(_philox_block(counter, key))
    return out[:count]


def oracle_uniforms(seed: int, stream: int, count: int) -> list[float]:
    return [((w >> 12) + 0.5) * 2.0**-52 for w in oracle_raw64(seed, stream, count)]


def oracle_normals(seed: int, stream: int, count: int) -> list[float]:
    return [_INV_CDF(u) for u in oracle_uniforms(seed, stream, count)]


# ------------------------------------------------------------- kernels


def oracle_kernel(family: str, u: float) -> float:
    if abs(u) > 1.0:
        return 0.0
    if family == "uniform":
        return 0.5
    return 0.75 * (1.0 - u * u)


def oracle_weights(v_series, v, family, h):
    k = [oracle_kernel(family, (vt - v) / h) for vt in v_series]
    total = sum(k)
    if total <= 0.0:
        return None
    return [ki / total for ki in k]


def oracle_pn(v_series, v, family, h, n_blocks):
    k = sum(oracle_kernel(family, (vt - v) / h) for vt in v_series)
    return k / (n_blocks * h)


def oracle_mask(v_series, family, h, bn, lo, hi):
    visits = sum(1 for vt in v_series if lo <= vt <= hi)
    return [
        oracle_pn(v_series, vt, family, h, visits) > bn for vt in v_series
    ]


def _oracle_tilde(y, x, v, family, h):
    """Detrended response and regressors via literal weight sums."""
    n = len(y)
    d = len(x[0])
    yt, xt = [], []
    for t in range(n):
        w = oracle_weights(v, v[t], family, h)
        sy = sum(w[k] * y[k] for k in range(n))
        sx = [sum(w[k] * x[k][j] for k in range(n)) for j in range(d)]
        yt.append(y[t] - sy)
        xt.append([x[t][j] - sx[j] for j in range(d)])
    return yt, xt


def _solve_weighted(yt, xt, keep):
    d = len(xt[0])
    a = np.zeros((d, d))
    b = np.zeros(d)
    for t, on in enumerate(keep):
        if not on:
            continue
        row = np.array(xt[t])
        a += np.outer(row, row)
        b += row * yt[t]
    return np.linalg.solve(a, b)


def oracle_naive_theta(y, x, v, family, h):
    """Least squares on every detrended row."""
    yt, xt = _oracle_tilde(y, x, v, family, h)
    return _solve_weighted(yt, xt, [True] * len(y))


def oracle_truncated_theta(y, x, v, family, h, bn, lo, hi):
    """Least squares on rows passing the density floor."""
    keep = oracle_mask(v, family, h, bn, lo, hi)
    yt, xt = _oracle_tilde(y, x, v, family, h)
    return _solve_weighted(yt, xt, keep)


def oracle_g_at(y, x, v, theta, point, family, h):
    """Kernel average of the partial residual at one location."""
    n = len(y)
    w = oracle_weights(v, point, family, h)
    if w is None:
        return None
    resid = [
        y[t] - sum(x[t][j] * theta[j] for j in range(len(theta)))
        for t in range(n)
    ]
    return sum(w[t] * resid[t] for t in range(n))


def oracle_cv_criterion(y, x, v, family, h, bn, lo, hi):
    """Leave-one-out criterion at one bandwidth: refit theta with the
    floor, then score kept observations whose reduced window is not
    empty.  Returns (criterion, dropped)."""
    n = len(y)
    keep = oracle_mask(v, family, h, bn, lo, hi)
    theta = oracle_truncated_theta(y, x, v, family, h, bn, lo, hi)
    resid = [
        y[t] - sum(x[t][j] * theta[j] for j in range(len(theta)))
        for t in range(n)
    ]
    crit = 0.0
    dropped = 0
    for t in range(n):
        if not keep[t]:
            continue
        num = 0.0
        den = 0.0
        for k in range(n):
            if k == t:
                continue
            kv = oracle_kernel(family, (v[k] - v[t]) / h)
            num += kv * resid[k]
            den += kv
        if den <= 0.0:
            dropped += 1
            continue
        crit += (resid[t] - num / den) ** 2
    return crit, dropped


def oracle_blocks(v, fvals, lo, hi):
    """Head, complete block sums and tail of sum(f) split at visits."""
    visits = [t for t, vt in enumerate(v) if lo <= vt <= hi]
    if not visits:
        raise ValueError("no visits")
    head = sum(fvals[: visits[0] + 1])
    blocks = [
        sum(fvals[visits[i] + 1 : visits[i + 1] + 1])
        for i in range(len(visits) - 1)
    ]
    tail = sum(fvals[visits[-1] + 1 :])
    return head, blocks, tail


def oracle_df_t(z) -> float:
    """No-intercept AR(1) t ratio against unity, from the sums."""
    lag = z[:-1]
    cur = z[1:]
    sxx = sum(a * a for a in lag)
    rho = sum(a * b for a, b in zip(lag, cur)) / sxx
    rss = sum((b - rho * a) ** 2 for a, b in zip(lag, cur))
    se = math.sqrt(rss / (len(cur) - 1) / sxx)
    return (rho - 1.0) / se
