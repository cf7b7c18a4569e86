"""Confidence-interval value type shared by the bootstrap and asymptotic methods."""

from __future__ import annotations

from dataclasses import dataclass

METHODS = ("bootstrap", "asymptotic")


class ZeroShiftError(ValueError):
    """The fitted shift is zero, so the requested interval is undefined."""


@dataclass(frozen=True)
class ConfidenceInterval:
    """Real-valued interval for the change index.

    Bounds are deliberately not clipped to the observable range [1, n];
    use clipped() for a display-friendly version.
    """

    lower: float
    upper: float
    level: float
    method: str

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError(f"interval bounds out of order: [{self.lower}, {self.upper}]")
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"level must lie in (0, 1), got {self.level}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def clipped(self, n: int) -> tuple[float, float]:
        """Bounds clamped to [1, n] for reporting."""
        lo = min(max(self.lower, 1.0), float(n))
        hi = min(max(self.upper, 1.0), float(n))
        return lo, hi
