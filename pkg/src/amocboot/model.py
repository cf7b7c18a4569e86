"""Domain types for mean-shift series, the AR(1) error generator, and series I/O."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter


class SeriesFormatError(ValueError):
    """A series file contained a line that does not parse as a finite number."""


@dataclass(frozen=True)
class TimeSeries:
    """Ordered real observations X(1), ..., X(n).

    Positions in every interface (change indices, segment boundaries) are
    1-based; storage is a plain 0-based float array, frozen after validation.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError(f"series must be one-dimensional, got shape {arr.shape}")
        if arr.size < 3:
            raise ValueError(f"series needs at least 3 observations, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("series contains non-finite values")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.size

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class AmocSpec:
    """At-most-one-change data generating process X(i) = mu + d*1{i > m} + e(i)."""

    n: int
    m: int
    mu: float = 0.0
    d: float = 0.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if not 1 <= self.m <= self.n - 1:
            raise ValueError(f"change index m={self.m} outside 1..{self.n - 1}")

    @property
    def theta(self) -> float:
        """Relative change location m/n."""
        return self.m / self.n


@dataclass(frozen=True)
class Ar1Params:
    """Stationary AR(1) error law e(i) = rho*e(i-1) + eps(i), eps ~ N(0, sd^2)."""

    rho: float
    innovation_sd: float = 1.0

    def __post_init__(self):
        if not abs(self.rho) < 1:
            raise ValueError(f"|rho| must be < 1 for stationarity, got {self.rho}")
        if not self.innovation_sd > 0:
            raise ValueError(f"innovation_sd must be positive, got {self.innovation_sd}")

    @property
    def long_run_variance(self) -> float:
        """tau^2 = sd^2 / (1 - rho)^2, the variance of partial-sum limits."""
        return self.innovation_sd**2 / (1.0 - self.rho) ** 2

    @property
    def marginal_variance(self) -> float:
        """Var e(i) = sd^2 / (1 - rho^2) under stationarity."""
        return self.innovation_sd**2 / (1.0 - self.rho**2)


def ar1_generate(params: Ar1Params, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a strictly stationary AR(1) path e(1..n).

    The pre-sample value e(0) is drawn from the stationary law
    N(0, sd^2/(1-rho^2)), so no burn-in is needed; the recursion is run
    as a linear filter with e(0) folded into the initial state.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    sd = params.innovation_sd
    e0 = rng.standard_normal() * sd / np.sqrt(1.0 - params.rho**2)
    eps = rng.standard_normal(n) * sd
    out, _ = lfilter([1.0], [1.0, -params.rho], eps, zi=np.array([params.rho * e0]))
    return out


def make_amoc_series(spec: AmocSpec, errors: np.ndarray) -> TimeSeries:
    """Assemble X(i) = mu + d*1{i > m} + e(i) from an error path of length n."""
    e = np.asarray(errors, dtype=np.float64)
    if e.shape != (spec.n,):
        raise ValueError(f"expected {spec.n} errors, got shape {e.shape}")
    x = spec.mu + e
    x[spec.m :] += spec.d
    return TimeSeries(x)


def read_series(path) -> TimeSeries:
    """Read a series from a text file, one observation per line.

    Blank lines are ignored; any other line that does not parse as a finite
    number raises SeriesFormatError with the offending line number.
    """
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                value = float(text)
            except ValueError:
                raise SeriesFormatError(f"{path}:{lineno}: not a number: {text!r}") from None
            if not np.isfinite(value):
                raise SeriesFormatError(f"{path}:{lineno}: non-finite value: {text!r}")
            values.append(value)
    if len(values) < 3:
        raise SeriesFormatError(f"{path}: need at least 3 observations, got {len(values)}")
    return TimeSeries(np.asarray(values))


def write_series(path, values) -> None:
    """Write a series as text, one observation per line (round-trip exact)."""
    arr = np.asarray(values, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        for v in arr:
            fh.write(f"{float(v)!r}\n")
