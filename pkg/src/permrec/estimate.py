from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from scipy.special import ndtri

DEFAULT_LEVEL = 0.99


def z_value(level: float) -> float:
    """Two-sided normal quantile for a confidence level in (0, 1)."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must lie in (0, 1), got {level}")
    return float(ndtri(0.5 + level / 2.0))


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo point estimate with a normal-approximation interval."""

    value: float
    std_error: float
    ci_low: float
    ci_high: float
    trials: int
    seed: int | None = None
    level: float = DEFAULT_LEVEL
    worker_count_independent: bool = True
    diagnostics: dict[str, Any] = field(default_factory=dict, compare=False)

    @classmethod
    def from_moments(
        cls,
        mean: float,
        variance: float,
        trials: int,
        seed: int | None = None,
        level: float = DEFAULT_LEVEL,
        bounds: tuple[float, float] | None = None,
        **diagnostics: Any,
    ) -> "Estimate":
        """Build from a sample mean and the per-trial sample variance.

        ``bounds`` clips the interval (not the point value) for quantities
        known to live in a range, e.g. ``(0, 1)`` for probabilities.
        """
        se = math.sqrt(max(variance, 0.0) / trials) if trials > 0 else math.inf
        half = z_value(level) * se
        lo, hi = mean - half, mean + half
        if bounds is not None:
            lo, hi = max(lo, bounds[0]), min(hi, bounds[1])
            lo, hi = min(lo, mean), max(hi, mean)
        return cls(float(mean), se, lo, hi, int(trials), seed, level, True, diagnostics)

    @classmethod
    def from_sums(
        cls,
        total: float,
        total_sq: float,
        trials: int,
        seed: int | None = None,
        level: float = DEFAULT_LEVEL,
        bounds: tuple[float, float] | None = None,
        **diagnostics: Any,
    ) -> "Estimate":
        mean = total / trials
        var = (total_sq - trials * mean * mean) / (trials - 1) if trials > 1 else 0.0
        return cls.from_moments(mean, var, trials, seed, level, bounds, **diagnostics)

    @classmethod
    def exact(cls, value: float, trials: int = 0, seed: int | None = None) -> "Estimate":
        return cls(float(value), 0.0, float(value), float(value), trials, seed)

    def contains(self, x: float) -> bool:
        return self.ci_low <= x <= self.ci_high

    def z_score(self, x: float) -> float:
        """Distance to ``x`` in standard errors (inf when the error is zero and x differs)."""
        d = self.value - x
        if self.std_error == 0.0:
            return 0.0 if d == 0.0 else math.inf
        return d / self.std_error


@dataclass(frozen=True)
class Moments:
    """Count, mean and centred second moment; merges are exact-order deterministic."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def of(cls, values) -> "Moments":
        import numpy as np

        values = np.asarray(values, dtype=float).ravel()
        if values.size == 0:
            return cls()
        mean = float(values.mean())
        return cls(values.size, mean, float(np.sum((values - mean) ** 2)))

    def merge(self, other: "Moments") -> "Moments":
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / n
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / n
        return Moments(n, mean, m2)

    @classmethod
    def merge_all(cls, parts) -> "Moments":
        acc = cls()
        for p in parts:
            acc = acc.merge(p)
        return acc

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0


def combined_se(*estimates: Estimate) -> float:
    return math.sqrt(sum(e.std_error**2 for e in estimates))
