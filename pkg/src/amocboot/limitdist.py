"""Monte Carlo sampling of the drifted-Wiener argmax law and asymptotic intervals.

The limit law is U = argmax_t {W(t) - |t| * g(t)} where W is a two-sided
Wiener process started at 0 and g takes one constant slope value on each
half-axis, determined by the relative change location theta and the CUSUM
weight exponent gamma. Samples come from walks on a symmetric grid.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from ._backend import walk_argmax
from .intervals import ConfidenceInterval, ZeroShiftError
from .rngstreams import derive_seed

BOUNDARY_HIT_LIMIT = 0.005
_BOUNDARY_ZONE = 0.95
# rows per kernel call are capped so one chunk's temporaries stay modest;
# draws are consumed row-major, so chunking never changes the samples
_CHUNK_TARGET_FLOATS = 8_000_000


class GridTooSmallError(RuntimeError):
    """Too many argmax draws landed near the grid edge.

    The drift is too shallow for the configured half-width; enlarge
    half_width_T (keeping step_h <= half_width_T/100) and rerun.
    """

    def __init__(self, fraction: float, config: "LimitLawConfig"):
        self.fraction = fraction
        self.config = config
        super().__init__(
            f"{fraction:.4f} of argmax draws fell within 5% of the grid edge "
            f"(limit {BOUNDARY_HIT_LIMIT}); enlarge half_width_T={config.half_width_T}"
        )


@dataclass(frozen=True)
class LimitLawConfig:
    """Settings for the discretized two-sided walk argmax sampler."""

    theta: float
    gamma: float
    half_width_T: float = 200.0
    step_h: float = 0.05
    replicates_M: int = 200_000
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        if not 0.0 <= self.gamma <= 0.5:
            raise ValueError(f"gamma must lie in [0, 1/2], got {self.gamma}")
        if not self.half_width_T > 0:
            raise ValueError(f"half_width_T must be positive, got {self.half_width_T}")
        if not self.step_h > 0:
            raise ValueError(f"step_h must be positive, got {self.step_h}")
        if self.step_h > self.half_width_T / 100.0:
            raise ValueError(
                f"step_h={self.step_h} too coarse: must be <= half_width_T/100 "
                f"= {self.half_width_T / 100.0}"
            )
        if self.replicates_M < 1000:
            raise ValueError(f"replicates_M must be at least 1000, got {self.replicates_M}")


@dataclass(frozen=True)
class LimitSamples:
    """Sorted argmax draws plus the grid-edge diagnostic."""

    samples: np.ndarray
    config: LimitLawConfig
    boundary_hit_fraction: float


def drift_slope(theta: float, gamma: float, t_sign: str) -> float:
    """Drift slope of the argmax law on one half-axis ('neg' or 'nonneg').

    neg:    (1-theta)*(1-gamma) + theta*gamma
    nonneg: (1-theta)*gamma + theta*(1-gamma)
    The two branches always sum to one; gamma = 1/2 collapses both to 1/2.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    if not 0.0 <= gamma <= 0.5:
        raise ValueError(f"gamma must lie in [0, 1/2], got {gamma}")
    if t_sign == "neg":
        return (1.0 - theta) * (1.0 - gamma) + theta * gamma
    if t_sign == "nonneg":
        return (1.0 - theta) * gamma + theta * (1.0 - gamma)
    raise ValueError(f"t_sign must be 'neg' or 'nonneg', got {t_sign!r}")


def _sample_grid_argmax(
    slope_neg: float,
    slope_pos: float,
    half_width: float,
    step: float,
    replicates: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, float]:
    """Draw argmax locations on the grid; returns (sorted t values, edge fraction)."""
    npoints = int(round(half_width / step))
    edge = _BOUNDARY_ZONE * half_width
    chunk = max(1, _CHUNK_TARGET_FLOATS // (2 * npoints))
    out = np.empty(replicates, dtype=np.float64)
    hits = 0
    done = 0
    while done < replicates:
        rows = min(chunk, replicates - done)
        z = rng.standard_normal((rows, 2 * npoints))
        j = walk_argmax(z, step, slope_neg, slope_pos)
        t = j * step
        hits += int(np.count_nonzero(np.abs(t) >= edge))
        out[done : done + rows] = t
        done += rows
    out.sort()
    return out, hits / replicates


def simulate_argmax_samples(config: LimitLawConfig) -> LimitSamples:
    """Monte Carlo draws of the argmax law on the literal (T, h) grid.

    Each replicate builds the two-sided drifted walk on the grid
    {-T, ..., -h, 0, h, ..., T} with independent N(0, h) increments per side
    and records the maximizing grid point (ties: closest to zero, negative
    side first). Raises GridTooSmallError when more than 0.5% of the draws
    land within 5% of the grid edge.
    """
    slope_neg = drift_slope(config.theta, config.gamma, "neg")
    slope_pos = drift_slope(config.theta, config.gamma, "nonneg")
    rng = np.random.default_rng(config.seed)
    samples, fraction = _sample_grid_argmax(
        slope_neg, slope_pos, config.half_width_T, config.step_h, config.replicates_M, rng
    )
    if fraction > BOUNDARY_HIT_LIMIT:
        raise GridTooSmallError(fraction, config)
    return LimitSamples(samples=samples, config=config, boundary_hit_fraction=fraction)


def simulate_argmax_samples_scaled(config: LimitLawConfig) -> LimitSamples:
    """Argmax draws via exact Brownian rescaling onto a unit-scale grid.

    W(lam*t)/sqrt(lam) is again a Wiener process, so the argmax at slopes
    (a, b) equals lam times the argmax at slopes (a, b)*sqrt(lam), exactly in
    distribution. Normalizing the shallow slope to 1/2 keeps every drift on
    the default grid no matter how asymmetric the branches are; samples come
    back in original units as multiples of lam*step_h. For gamma = 1/2 both
    slopes are already 1/2 and this coincides with the literal sampler,
    draw for draw.
    """
    a = drift_slope(config.theta, config.gamma, "neg")
    b = drift_slope(config.theta, config.gamma, "nonneg")
    shallow = min(a, b)
    lam = 1.0 / (4.0 * shallow * shallow)
    scale = math.sqrt(lam)
    rng = np.random.default_rng(config.seed)
    samples, fraction = _sample_grid_argmax(
        a * scale, b * scale, config.half_width_T, config.step_h, config.replicates_M, rng
    )
    if fraction > BOUNDARY_HIT_LIMIT:
        raise GridTooSmallError(fraction, config)
    return LimitSamples(
        samples=samples * lam, config=config, boundary_hit_fraction=fraction
    )


def _sorted_sample_array(samples) -> np.ndarray:
    if isinstance(samples, LimitSamples):
        return samples.samples
    return np.asarray(samples, dtype=np.float64)


def empirical_quantile(sorted_values: np.ndarray, p: float) -> float:
    """Left-continuous empirical quantile: smallest sample v with F(v) >= p.

    The defining comparison (j+1)/M >= p is evaluated in floating point, so
    grid probabilities like p = k/M behave predictably; the ceil candidate
    is nudged to the smallest index that satisfies it.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    values = np.asarray(sorted_values)
    m = values.size
    if m == 0:
        raise ValueError("empty sample")
    j = int(math.ceil(p * m)) - 1
    j = min(max(j, 0), m - 1)
    while j > 0 and j / m >= p:
        j -= 1
    while (j + 1) / m < p:
        j += 1
    return float(values[j])


def quantile(samples, p: float) -> float:
    """Empirical quantile of sampled draws (LimitSamples or a sorted array)."""
    return empirical_quantile(_sorted_sample_array(samples), p)


def asymptotic_ci(m_hat: int, tau2: float, d_hat: float, samples, alpha: float) -> ConfidenceInterval:
    """Limit-law interval m_hat - (tau2/d_hat^2) * [q(1-alpha/2), q(alpha/2)].

    The scale factor tau2/d_hat^2 converts limit-law units to observation
    index units. Bounds are real numbers, not clipped to [1, n]. Raises
    ZeroShiftError when d_hat == 0.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if d_hat == 0.0:
        raise ZeroShiftError("fitted shift is zero: asymptotic interval undefined")
    if not tau2 > 0.0:
        raise ValueError(f"tau2 must be positive, got {tau2}")
    v = _sorted_sample_array(samples)
    c = tau2 / (d_hat * d_hat)
    lower = m_hat - c * empirical_quantile(v, 1.0 - alpha / 2.0)
    upper = m_hat - c * empirical_quantile(v, alpha / 2.0)
    return ConfidenceInterval(lower=lower, upper=upper, level=1.0 - alpha, method="asymptotic")


class LimitQuantileCache:
    """Thread-safe cache of limit-law samples keyed by (theta, gamma).

    theta is quantized to 1e-3 for the key and the simulation runs at the
    quantized value with a seed derived from the key alone, so every thread
    that asks for a cell gets identical samples regardless of scheduling.
    Uses the rescaled sampler, which keeps shallow drifts on the grid.
    """

    def __init__(
        self,
        master_seed: int,
        half_width_T: float = 200.0,
        step_h: float = 0.05,
        replicates_M: int = 200_000,
        stream_tag: int = 0,
    ):
        self.master_seed = int(master_seed)
        self.half_width_T = float(half_width_T)
        self.step_h = float(step_h)
        self.replicates_M = int(replicates_M)
        self.stream_tag = int(stream_tag)
        self._lock = threading.Lock()
        self._entries: dict[tuple[int, int], LimitSamples] = {}
        self._key_locks: dict[tuple[int, int], threading.Lock] = {}

    @staticmethod
    def key_for(theta: float, gamma: float) -> tuple[int, int]:
        # clamp so quantizing an extreme theta never leaves (0, 1)
        return min(max(int(round(theta * 1000)), 1), 999), int(round(gamma * 1000))

    def get(self, theta: float, gamma: float) -> LimitSamples:
        key = self.key_for(theta, gamma)
        with self._lock:
            hit = self._entries.get(key)
            if hit is not None:
                return hit
            key_lock = self._key_locks.setdefault(key, threading.Lock())
        with key_lock:
            with self._lock:
                hit = self._entries.get(key)
                if hit is not None:
                    return hit
            config = LimitLawConfig(
                theta=key[0] / 1000.0,
                gamma=key[1] / 1000.0,
                half_width_T=self.half_width_T,
                step_h=self.step_h,
                replicates_M=self.replicates_M,
                seed=derive_seed(self.master_seed, self.stream_tag, key[0], key[1]),
            )
            samples = simulate_argmax_samples_scaled(config)
            with self._lock:
                self._entries[key] = samples
            return samples
