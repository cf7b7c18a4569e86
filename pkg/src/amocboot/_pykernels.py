"""Pure-numpy implementations of the hot kernels.

Import-time fallback for the compiled extension. Both backends perform the
same arithmetic in the same order (extended-precision partial sums on the
CUSUM path, plain double accumulation on the random-walk path) so their
outputs agree to the last bit up to libm rounding in the pow() weights.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"


def _cusum_weights(n: int, gamma: float) -> np.ndarray:
    k = np.arange(1, n, dtype=np.float64)
    return (float(n) / (k * (float(n) - k))) ** gamma


def cusum_stats(x: np.ndarray, gamma: float) -> np.ndarray:
    """Weighted CUSUM transform of one series; returns S(1), ..., S(n-1).

    S(k) = (n/(k*(n-k)))**gamma * sum_{i<=k}(X(i) - mean). Partial sums are
    accumulated in long double; the weight product is done in double.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.size
    cs = np.cumsum(x.astype(np.longdouble))
    xbar = cs[-1] / n
    k_ld = np.arange(1, n, dtype=np.longdouble)
    partial = (cs[:-1] - k_ld * xbar).astype(np.float64)
    return partial * _cusum_weights(n, gamma)


def bootstrap_mstars(
    residuals: np.ndarray,
    offsets: np.ndarray,
    block_length: int,
    m_hat: int,
    mu1: float,
    mu2: float,
    gamma: float,
) -> np.ndarray:
    """Change-point argmax for every block-bootstrap resample.

    offsets has shape (B, L); each row rebuilds one length-n series from
    circular blocks of the residuals (truncated to n) plus the fitted step,
    and the index of the first |S| maximum is recorded, 1-based.
    """
    res = np.ascontiguousarray(residuals, dtype=np.float64)
    n = res.size
    off = np.ascontiguousarray(offsets, dtype=np.int64)
    nrows, nblocks = off.shape
    kk = int(block_length)
    idx = (off[:, :, None] + np.arange(kk, dtype=np.int64)[None, None, :]) % n
    estar = res[idx.reshape(nrows, nblocks * kk)[:, :n]]
    step = np.where(np.arange(1, n + 1) <= m_hat, float(mu1), float(mu2))
    xstar = estar + step[None, :]
    cs = np.cumsum(xstar.astype(np.longdouble), axis=1)
    xbar = cs[:, -1] / n
    k_ld = np.arange(1, n, dtype=np.longdouble)
    partial = (cs[:, :-1] - k_ld[None, :] * xbar[:, None]).astype(np.float64)
    s = np.abs(partial * _cusum_weights(n, gamma)[None, :])
    return np.argmax(s, axis=1).astype(np.int64) + 1


def walk_argmax(z: np.ndarray, step_h: float, slope_neg: float, slope_pos: float) -> np.ndarray:
    """Grid argmax of two-sided drifted random walks.

    z has shape (R, 2N): per row, N standard-normal increments for the
    negative half-axis then N for the positive one. The walk value at grid
    point j*step_h is the scaled increment sum minus slope*|j*step_h|; the
    origin contributes value 0. Ties pick the point closest to zero, the
    negative one first. Returns signed grid indices in [-N, N].
    """
    z = np.ascontiguousarray(z, dtype=np.float64)
    nrows, ncols = z.shape
    half_n = ncols // 2
    sqrt_h = math.sqrt(step_h)
    zs = z * sqrt_h
    t = np.arange(1, half_n + 1, dtype=np.float64) * step_h
    vneg = np.cumsum(zs[:, :half_n], axis=1) - slope_neg * t[None, :]
    vpos = np.cumsum(zs[:, half_n:], axis=1) - slope_pos * t[None, :]
    values = np.empty((nrows, 2 * half_n + 1), dtype=np.float64)
    values[:, :half_n] = vneg[:, ::-1]
    values[:, half_n] = 0.0
    values[:, half_n + 1 :] = vpos
    j = np.arange(-half_n, half_n + 1, dtype=np.int64)
    # total preference order: larger value, then smaller |j|, then j < 0
    prio = 2 * np.abs(j) + (j > 0)
    best = values.max(axis=1)
    masked = np.where(values == best[:, None], prio[None, :], np.iinfo(np.int64).max)
    return (np.argmin(masked, axis=1) - half_n).astype(np.int64)
