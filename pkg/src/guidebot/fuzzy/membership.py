"""Gaussian membership functions."""

from __future__ import annotations

import math
from dataclasses import dataclass

LABELS = ("negative", "zero", "positive")


def gaussian_mf(x: float, c: float, sigma: float) -> float:
    """exp(-((x-c)/sigma)^2 / 2); peaks at 1 when x == c."""
    z = (x - c) / sigma
    return math.exp(-0.5 * z * z)


@dataclass(frozen=True)
class GaussianTerm:
    """One linguistic value: a labeled Gaussian over the variable's universe."""

    label: str
    c: float
    sigma: float

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"term label must be one of {LABELS}, got {self.label!r}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def mu(self, x: float) -> float:
        return gaussian_mf(x, self.c, self.sigma)
