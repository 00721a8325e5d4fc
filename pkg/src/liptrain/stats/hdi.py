"""Highest density interval of a posterior sample."""

from __future__ import annotations

import math

import numpy as np

__all__ = ["TooFewSamples", "hdi"]

MIN_SAMPLES = 100


class TooFewSamples(ValueError):
    """Not enough posterior draws to estimate an interval."""


def hdi(samples, mass: float = 0.95) -> tuple[float, float]:
    """Shortest contiguous interval holding `mass` of the draws.

    Sorts the sample and scans every window of ceil(mass * n) consecutive
    values for the minimal width; that exhaustive scan is the definition,
    so no approximation is involved.
    """
    if not 0.0 < mass < 1.0:
        raise ValueError(f"mass must be in (0, 1), got {mass}")
    data = np.sort(np.asarray(samples, dtype=float).ravel())
    n = data.size
    if n < MIN_SAMPLES:
        raise TooFewSamples(f"need at least {MIN_SAMPLES} samples, got {n}")
    k = math.ceil(mass * n)
    if k >= n:
        return float(data[0]), float(data[-1])
    widths = data[k - 1:] - data[: n - k + 1]
    i = int(np.argmin(widths))
    return float(data[i]), float(data[i + k - 1])
