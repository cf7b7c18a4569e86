"""Weighted CUSUM statistics and the mean-shift change-point fit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import cusum_stats
from .model import TimeSeries


@dataclass(frozen=True)
class CusumStatistics:
    """S(k) for k = 1..n-1 at a fixed weight exponent gamma."""

    gamma: float
    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.size + 1


@dataclass(frozen=True)
class ChangePointFit:
    """Change index estimate with segment means and centered residuals."""

    gamma: float
    m_hat: int
    mu1_hat: float
    mu2_hat: float
    d_hat: float
    residuals_centered: np.ndarray

    @property
    def n(self) -> int:
        return self.residuals_centered.size


def compute_cusum(series: TimeSeries, gamma: float) -> CusumStatistics:
    """Weighted cumulative sums S(k) = (n/(k*(n-k)))**gamma * sum_{i<=k}(X(i) - mean).

    One O(n) pass with extended-precision partial sums.
    """
    if not 0.0 <= gamma <= 0.5:
        raise ValueError(f"gamma must lie in [0, 1/2], got {gamma}")
    values = cusum_stats(series.values, float(gamma))
    return CusumStatistics(gamma=float(gamma), values=values)


def estimate_changepoint(stats: CusumStatistics) -> int:
    """Smallest k in 1..n-1 maximizing |S(k)|."""
    return int(np.argmax(np.abs(stats.values))) + 1


def fit_amoc(series: TimeSeries, gamma: float) -> ChangePointFit:
    """Fit the single mean-shift model at the CUSUM argmax.

    Segment means are taken left and right of m_hat, the shift estimate is
    their difference, and residuals are recentered to zero overall mean.
    """
    stats = compute_cusum(series, gamma)
    m_hat = estimate_changepoint(stats)
    x = series.values
    mu1 = float(np.mean(x[:m_hat]))
    mu2 = float(np.mean(x[m_hat:]))
    e_hat = np.concatenate([x[:m_hat] - mu1, x[m_hat:] - mu2])
    e_tilde = e_hat - np.mean(e_hat)
    return ChangePointFit(
        gamma=float(gamma),
        m_hat=m_hat,
        mu1_hat=mu1,
        mu2_hat=mu2,
        d_hat=mu2 - mu1,
        residuals_centered=e_tilde,
    )
