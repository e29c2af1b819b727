"""Exponential-model likelihood ratio testing, bias-corrected estimation of
the proportion of true nulls, and adaptive Benjamini-Hochberg FDR control
for segmented lifetime data."""

from ._backend import backend_name
from .adaptive_bh import (
    AdjustedPValues,
    ConfusionCounts,
    RejectionSet,
    bh_adjust,
    confusion,
    reject_at,
)
from .distributions import (
    chi2_cdf,
    chi2_quantile_upper,
    chi2_sf,
    f_cdf,
    f_quantile_upper,
    f_sf,
    sample_exponential,
    sample_truncated_exponential,
    substream,
)
from .errors import DataFormatError, InvalidParameterError, NumericError
from .estimators import (
    AVERAGE_LAMBDA_GRID,
    BOOTSTRAP_LAMBDA_GRID,
    EffectSet,
    Pi0Estimate,
    Pi0Method,
    average_estimator,
    conservative_tail_average,
    pi0_mean_corrected,
    pi0_tail_corrected,
    storey_bootstrap,
    storey_lambda,
)
from .lrt import (
    TestProblem,
    TestResult,
    expected_nonnull_p,
    lrt_one_sample,
    lrt_two_sample,
    q_upper,
)
from .pipeline import (
    AnalysisReport,
    SegmentRecord,
    SummaryRecord,
    analyze,
    ci_theta,
    ks_exponentiality,
    load_segments,
    load_summary,
    write_report,
)
from .simulation import MetricsRow, SimConfig, TruthLabels, gen_theta, run_replication, run_study

__version__ = "0.1.0"

__all__ = [
    "backend_name",
    "AdjustedPValues", "ConfusionCounts", "RejectionSet",
    "bh_adjust", "confusion", "reject_at",
    "chi2_cdf", "chi2_sf", "chi2_quantile_upper",
    "f_cdf", "f_sf", "f_quantile_upper",
    "sample_exponential", "sample_truncated_exponential", "substream",
    "DataFormatError", "InvalidParameterError", "NumericError",
    "AVERAGE_LAMBDA_GRID", "BOOTSTRAP_LAMBDA_GRID",
    "EffectSet", "Pi0Estimate", "Pi0Method",
    "average_estimator", "conservative_tail_average",
    "pi0_mean_corrected", "pi0_tail_corrected",
    "storey_bootstrap", "storey_lambda",
    "TestProblem", "TestResult",
    "expected_nonnull_p", "lrt_one_sample", "lrt_two_sample", "q_upper",
    "AnalysisReport", "SegmentRecord", "SummaryRecord",
    "analyze", "ci_theta", "ks_exponentiality",
    "load_segments", "load_summary", "write_report",
    "MetricsRow", "SimConfig", "TruthLabels",
    "gen_theta", "run_replication", "run_study",
    "__version__",
]
