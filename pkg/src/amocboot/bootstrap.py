"""Circular block bootstrap of centered residuals and the basic interval."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from ._backend import bootstrap_mstars
from .cusum import ChangePointFit
from .intervals import ConfidenceInterval

SCHEMES = ("circular_overlapping", "circular_nonoverlapping")

# cap elements per kernel call; rows are independent so splitting is invisible
_CHUNK_TARGET_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class BootstrapConfig:
    """Block resampling settings; the overlapping circular scheme is the default."""

    block_length: int
    resamples: int = 10_000
    scheme: str = "circular_overlapping"
    seed: int = 0

    def __post_init__(self):
        if self.block_length < 1:
            raise ValueError(f"block_length must be at least 1, got {self.block_length}")
        if self.resamples < 2:
            raise ValueError(f"resamples must be at least 2, got {self.resamples}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")


@dataclass(frozen=True)
class BootstrapDistribution:
    """Resampled change-point estimates m*_1..m*_B around a fit."""

    samples: np.ndarray
    m_hat: int
    gamma: float

    @property
    def resamples(self) -> int:
        return self.samples.size


def block_count(n: int, block_length: int) -> int:
    """Number of blocks L = ceil(n / block_length); resamples are cut back to n."""
    return -(-n // block_length)


def draw_offsets(n: int, block_length: int, scheme: str, rng: np.random.Generator) -> np.ndarray:
    """0-based block start offsets for one resample, one per block.

    Overlapping: L i.i.d. uniform draws from {0, ..., n-1}. Non-overlapping:
    L i.i.d. uniform draws from {0, block_length, ..., (L-1)*block_length}.
    """
    nblocks = block_count(n, block_length)
    if scheme == "circular_overlapping":
        return rng.integers(0, n, size=nblocks)
    if scheme == "circular_nonoverlapping":
        return rng.integers(0, nblocks, size=nblocks) * block_length
    raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")


def resample_errors(residuals: np.ndarray, block_length: int, offsets: np.ndarray) -> np.ndarray:
    """Concatenated circular blocks: element k of block l is residual (offset_l + k) mod n."""
    res = np.asarray(residuals, dtype=np.float64)
    n = res.size
    off = np.asarray(offsets, dtype=np.int64)
    idx = (off[:, None] + np.arange(block_length, dtype=np.int64)[None, :]) % n
    return res[idx].reshape(-1)


def reconstruct_series(e_star: np.ndarray, m_hat: int, mu1_hat: float, mu2_hat: float, n: int) -> np.ndarray:
    """Fitted step plus resampled noise, truncated to n observations."""
    e = np.asarray(e_star, dtype=np.float64)
    if e.size < n:
        raise ValueError(f"need at least {n} resampled errors, got {e.size}")
    x = e[:n].copy()
    x[:m_hat] += mu1_hat
    x[m_hat:] += mu2_hat
    return x


def bootstrap_distribution(fit: ChangePointFit, config: BootstrapConfig) -> BootstrapDistribution:
    """Change-point argmax over config.resamples circular-block resamples.

    Each resample rebuilds a series from freshly drawn blocks of the fit's
    centered residuals plus the fitted step, then records the first |S|
    argmax at the fit's gamma. All offsets come from one generator seeded by
    config.seed, drawn as a single (B, L) matrix, which equals B sequential
    draw_offsets calls on the same stream.
    """
    res = fit.residuals_centered
    n = res.size
    kk = config.block_length
    if kk > n:
        raise ValueError(f"block_length={kk} exceeds series length {n}")
    nblocks = block_count(n, kk)
    rng = np.random.default_rng(config.seed)
    if config.scheme == "circular_overlapping":
        offsets = rng.integers(0, n, size=(config.resamples, nblocks))
    else:
        offsets = rng.integers(0, nblocks, size=(config.resamples, nblocks)) * kk
    rows_per_chunk = max(1, _CHUNK_TARGET_ELEMENTS // max(1, n))
    parts = []
    for start in range(0, config.resamples, rows_per_chunk):
        block = offsets[start : start + rows_per_chunk]
        parts.append(
            bootstrap_mstars(res, block, kk, fit.m_hat, fit.mu1_hat, fit.mu2_hat, fit.gamma)
        )
    samples = parts[0] if len(parts) == 1 else np.concatenate(parts)
    return BootstrapDistribution(samples=samples, m_hat=fit.m_hat, gamma=fit.gamma)


def bootstrap_quantiles(samples: np.ndarray, alpha: float) -> tuple[float, float]:
    """Outer quantile pair (q_L, q_U) of a bootstrap sample.

    q_L = sup{u : fraction(samples < u) <= alpha/2} and
    q_U = inf{u : fraction(samples > u) <= alpha/2}; both suprema are
    attained at order statistics, c+1 positions in from each end, where c is
    the largest count with c/B <= alpha/2 under float comparison.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    s = np.sort(np.asarray(samples))
    b = s.size
    if b < 2:
        raise ValueError(f"need at least 2 samples, got {b}")
    half = alpha / 2.0
    c = int(math.floor(b * half))
    while (c + 1) / b <= half:
        c += 1
    while c > 0 and c / b > half:
        c -= 1
    return float(s[c]), float(s[b - 1 - c])


def bootstrap_ci(dist: BootstrapDistribution, alpha: float) -> ConfidenceInterval:
    """Basic (reflected) interval [2*m_hat - q_U, 2*m_hat - q_L]."""
    q_lo, q_hi = bootstrap_quantiles(dist.samples, alpha)
    return ConfidenceInterval(
        lower=2.0 * dist.m_hat - q_hi,
        upper=2.0 * dist.m_hat - q_lo,
        level=1.0 - alpha,
        method="bootstrap",
    )


def write_bootstrap_csv(dist: BootstrapDistribution, path) -> None:
    """Dump the resampled estimates as CSV with columns b, m_star."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["b", "m_star"])
        for i, v in enumerate(dist.samples, start=1):
            writer.writerow([i, int(v)])
