"""Long-run variance: change-adjusted autocovariances and the Bartlett window."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import TimeSeries

TAU2_REL_FLOOR = 1e-8
TAU2_ABS_FLOOR = 1e-12


@dataclass(frozen=True)
class LrvEstimate:
    """Bartlett long-run variance with the autocovariances it was built from.

    floored marks estimates that were clamped to the positivity floor; the
    clamped value is what tau2 holds.
    """

    tau2: float
    window: int
    autocovariances: np.ndarray
    floored: bool


def default_window(n: int, rule: float = 0.1) -> int:
    """Window length max(1, floor(rule * n))."""
    return max(1, int(np.floor(rule * n)))


def _centered_segments(series: TimeSeries, m_hat: int) -> tuple[np.ndarray, np.ndarray]:
    x = series.values
    if not 1 <= m_hat <= x.size - 1:
        raise ValueError(f"m_hat={m_hat} outside 1..{x.size - 1}")
    left = x[:m_hat]
    right = x[m_hat:]
    return left - np.mean(left), right - np.mean(right)


def _lag_product(left_c: np.ndarray, right_c: np.ndarray, lag: int) -> float:
    # products never straddle the split: t runs to m_hat-lag and n-lag only
    total = 0.0
    if left_c.size - lag >= 1:
        total += float(np.dot(left_c[: left_c.size - lag], left_c[lag:]))
    if right_c.size - lag >= 1:
        total += float(np.dot(right_c[: right_c.size - lag], right_c[lag:]))
    return total


def split_autocovariance(series: TimeSeries, m_hat: int, lag: int) -> float:
    """Lag-k autocovariance with each segment centered at its own mean.

    R(k) = (1/n) * [sum_{t=1}^{m_hat-k} c1(t) c1(t+k) + sum_{t=m_hat+1}^{n-k} c2(t) c2(t+k)]
    where c1, c2 are the segment-centered observations; an empty range
    contributes zero and the normalization is 1/n regardless.
    """
    n = series.n
    if not 0 <= lag <= n - 2:
        raise ValueError(f"lag={lag} outside 0..{n - 2}")
    left_c, right_c = _centered_segments(series, m_hat)
    return _lag_product(left_c, right_c, lag) / n


def bartlett_lrv(series: TimeSeries, m_hat: int, window: int | None = None) -> LrvEstimate:
    """Bartlett-window long-run variance from the split autocovariances.

    tau2 = R(0) + 2 * sum_{k=1}^{window} (1 - k/window) * R(k), clamped below
    at max(1e-8 * R(0), 1e-12) so downstream interval scaling stays positive;
    clamping is flagged on the result.
    """
    n = series.n
    if window is None:
        window = default_window(n)
    window = int(window)
    if not 1 <= window <= n - 2:
        raise ValueError(f"window={window} outside 1..{n - 2}")
    left_c, right_c = _centered_segments(series, m_hat)
    r = np.array([_lag_product(left_c, right_c, k) / n for k in range(window + 1)])
    k = np.arange(1, window + 1, dtype=np.float64)
    tau2 = float(r[0] + 2.0 * np.sum((1.0 - k / window) * r[1:]))
    floor = max(TAU2_REL_FLOOR * r[0], TAU2_ABS_FLOOR)
    floored = tau2 < floor
    return LrvEstimate(
        tau2=float(max(tau2, floor)),
        window=window,
        autocovariances=r,
        floored=bool(floored),
    )
