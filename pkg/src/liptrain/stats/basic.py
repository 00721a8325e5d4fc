"""Descriptive summaries and the two frequentist tests of the analysis suite.

Covers SEM, Tukey boxplot summaries, the two-sample z-test (used for the
native vs non-native accent comparison at alpha = 0.1) and the Welch
t-test (used alongside the Bayesian comparison of real vs synthetic
cohorts).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .special import normal_cdf, normal_quantile, student_t_sf_two_sided

__all__ = [
    "DegenerateSample",
    "SmallSampleWarning",
    "ScoreSample",
    "BoxplotSummary",
    "ZTestResult",
    "TTestResult",
    "sem",
    "boxplot_summary",
    "p_from_z",
    "z_test",
    "t_test",
]

# Below this group size the normal approximation behind the z-test is shaky.
LARGE_SAMPLE_N = 30


class DegenerateSample(ValueError):
    """Sample cannot support the requested statistic (too small or zero variance)."""


class SmallSampleWarning(UserWarning):
    """Issued when a large-sample test is applied below its sample floor."""


@dataclass(frozen=True)
class ScoreSample:
    """A named group of real-valued scores (quiz points, 0-20)."""

    label: str
    values: tuple[float, ...]

    def __init__(self, label: str, values) -> None:
        vals = tuple(float(v) for v in values)
        if any(not math.isfinite(v) for v in vals):
            raise ValueError(f"sample {label!r} contains non-finite values")
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return len(self.values)

    def mean(self) -> float:
        return float(np.mean(self.values))

    def sd(self) -> float:
        """Sample standard deviation (n-1 denominator)."""
        if self.n < 2:
            raise DegenerateSample(f"sample {self.label!r} needs n >= 2 for a standard deviation")
        return float(np.std(self.values, ddof=1))

    def to_dict(self) -> dict:
        return {"label": self.label, "values": list(self.values)}

    @classmethod
    def from_dict(cls, d: dict) -> "ScoreSample":
        return cls(d["label"], d["values"])


@dataclass(frozen=True)
class BoxplotSummary:
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "median": self.median,
            "q1": self.q1,
            "q3": self.q3,
            "whisker_low": self.whisker_low,
            "whisker_high": self.whisker_high,
            "outliers": list(self.outliers),
        }


@dataclass(frozen=True)
class ZTestResult:
    z: float
    p: float
    alpha: float
    accepted_range: tuple[float, float]
    reject_null: bool

    def to_dict(self) -> dict:
        return {
            "z": self.z,
            "p": self.p,
            "alpha": self.alpha,
            "accepted_range": list(self.accepted_range),
            "reject_null": self.reject_null,
        }


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p: float

    def to_dict(self) -> dict:
        return {"t": self.t, "df": self.df, "p": self.p}


def sem(sample: ScoreSample) -> float:
    """Standard error of the mean, s / sqrt(n)."""
    if sample.n < 2:
        raise DegenerateSample(f"SEM of {sample.label!r} needs n >= 2, got n={sample.n}")
    return sample.sd() / math.sqrt(sample.n)


def boxplot_summary(sample: ScoreSample) -> BoxplotSummary:
    """Tukey five-number summary plus outliers.

    Whiskers reach the most extreme data points within 1.5 * IQR of the
    quartiles; anything beyond is listed as an outlier.  Quartiles use
    linear interpolation.
    """
    if sample.n < 1:
        raise DegenerateSample(f"boxplot of {sample.label!r} needs at least one value")
    data = np.sort(np.asarray(sample.values, dtype=float))
    q1, med, q3 = (float(q) for q in np.percentile(data, [25.0, 50.0, 75.0]))
    iqr = q3 - q1
    lo_fence = q1 - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    inside = data[(data >= lo_fence) & (data <= hi_fence)]
    outliers = tuple(float(v) for v in data[(data < lo_fence) | (data > hi_fence)])
    return BoxplotSummary(
        median=med,
        q1=q1,
        q3=q3,
        whisker_low=float(inside[0]),
        whisker_high=float(inside[-1]),
        outliers=outliers,
    )


def p_from_z(z: float) -> float:
    """Two-tailed p-value 2 * (1 - Phi(|z|))."""
    if not math.isfinite(z):
        raise ValueError(f"z statistic must be finite, got {z}")
    return 2.0 * (1.0 - normal_cdf(abs(z)))


def z_test(a: ScoreSample, b: ScoreSample, alpha: float = 0.1) -> ZTestResult:
    """Two-sample z-test on group means.

    z = (mean_a - mean_b) / sqrt(sa^2/na + sb^2/nb).  Warns when either
    group is below the large-sample threshold of 30.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if a.n < 2 or b.n < 2:
        raise DegenerateSample("z-test needs n >= 2 in both groups")
    if min(a.n, b.n) < LARGE_SAMPLE_N:
        warnings.warn(
            f"z-test groups smaller than {LARGE_SAMPLE_N} "
            f"(n={a.n}, {b.n}); normal approximation may be poor",
            SmallSampleWarning,
            stacklevel=2,
        )
    se2 = a.sd() ** 2 / a.n + b.sd() ** 2 / b.n
    diff = a.mean() - b.mean()
    if se2 == 0.0:
        if diff != 0.0:
            raise DegenerateSample("zero pooled variance with unequal means: z overflows")
        z = 0.0
    else:
        z = diff / math.sqrt(se2)
    p = p_from_z(z)
    crit = normal_quantile(1.0 - alpha / 2.0)
    return ZTestResult(
        z=z,
        p=p,
        alpha=alpha,
        accepted_range=(-crit, crit),
        reject_null=p < alpha,
    )


def t_test(a: ScoreSample, b: ScoreSample) -> TTestResult:
    """Welch two-sample t-test with Welch-Satterthwaite degrees of freedom."""
    if a.n < 2 or b.n < 2:
        raise DegenerateSample("t-test needs n >= 2 in both groups")
    va, vb = a.sd() ** 2 / a.n, b.sd() ** 2 / b.n
    diff = a.mean() - b.mean()
    if va + vb == 0.0:
        raise DegenerateSample("zero variance in both groups: t statistic undefined")
    t = diff / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va ** 2 / (a.n - 1) + vb ** 2 / (b.n - 1))
    p = student_t_sf_two_sided(t, df)
    return TTestResult(t=t, df=df, p=p)
