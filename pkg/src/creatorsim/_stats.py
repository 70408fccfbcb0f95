"""Monte Carlo estimate containers and mergeable moment accumulators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MetricEstimate:
    """Monte Carlo mean with its standard error and sample count."""

    mean: float
    stderr: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.stderr < 0.0:
            raise ValueError("stderr must be >= 0")

    @classmethod
    def from_samples(cls, values: np.ndarray) -> "MetricEstimate":
        values = np.asarray(values, dtype=float)
        n = values.size
        mean = float(values.mean())
        stderr = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(mean, stderr, n)

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "n": self.n}


@dataclass
class RunningMoments:
    """Count/mean/M2 accumulator; merges are order-insensitive up to fp error."""

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def add_samples(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            return
        other = RunningMoments(
            n=int(values.size),
            mean=float(values.mean()),
            m2=float(((values - values.mean()) ** 2).sum()),
        )
        self.merge(other)

    def merge(self, other: "RunningMoments") -> None:
        if other.n == 0:
            return
        if self.n == 0:
            self.n, self.mean, self.m2 = other.n, other.mean, other.m2
            return
        n = self.n + other.n
        delta = other.mean - self.mean
        self.m2 = self.m2 + other.m2 + delta * delta * self.n * other.n / n
        self.mean = self.mean + delta * other.n / n
        self.n = n

    def estimate(self) -> MetricEstimate:
        if self.n == 0:
            raise ValueError("no samples accumulated")
        var = self.m2 / (self.n - 1) if self.n > 1 else 0.0
        return MetricEstimate(self.mean, math.sqrt(max(0.0, var) / self.n), self.n)
