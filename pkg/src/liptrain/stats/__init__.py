"""Score-sample statistics: frequentist tests, HDI, and the BEST sampler."""

from __future__ import annotations

from .basic import (
    LARGE_SAMPLE_N,
    BoxplotSummary,
    DegenerateSample,
    ScoreSample,
    SmallSampleWarning,
    TTestResult,
    ZTestResult,
    boxplot_summary,
    p_from_z,
    sem,
    t_test,
    z_test,
)
from .diagnostics import effective_sample_size, split_rhat
from .hdi import MIN_SAMPLES, TooFewSamples, hdi
from .mcmc import BestResult, McmcConfig, NonConvergenceWarning, best_compare
from .special import (
    normal_cdf,
    normal_quantile,
    regularized_incomplete_beta,
    student_t_cdf,
    student_t_sf_two_sided,
)

__all__ = [
    "LARGE_SAMPLE_N",
    "MIN_SAMPLES",
    "BestResult",
    "BoxplotSummary",
    "DegenerateSample",
    "McmcConfig",
    "NonConvergenceWarning",
    "ScoreSample",
    "SmallSampleWarning",
    "TTestResult",
    "TooFewSamples",
    "ZTestResult",
    "best_compare",
    "boxplot_summary",
    "effective_sample_size",
    "hdi",
    "normal_cdf",
    "normal_quantile",
    "p_from_z",
    "regularized_incomplete_beta",
    "sem",
    "split_rhat",
    "student_t_cdf",
    "student_t_sf_two_sided",
    "t_test",
    "z_test",
]
