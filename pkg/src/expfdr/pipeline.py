"""Data pipeline for segmented failure data.

Ingests either raw per-observation files (``segment_id,value[,labels...]``)
or 4-column summaries (``segment n pval del``), validates exponentiality
per segment with a parametric-bootstrap Kolmogorov-Smirnov test, scales by
a benchmark mean, runs the two-sided one-sample LRT per segment, estimates
pi0 every way, applies adaptive BH at the requested q levels, and builds a
report with exact chi-square confidence intervals per segment.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .adaptive_bh import bh_adjust, reject_at
from .distributions import chi2_quantile_upper, substream
from .errors import DataFormatError, InvalidParameterError
from .estimators import (
    EffectSet,
    Pi0Estimate,
    average_estimator,
    pi0_mean_corrected,
    pi0_tail_corrected,
    storey_bootstrap,
)
from .lrt import TestProblem, lrt_one_sample

__all__ = [
    "SegmentRecord", "SummaryRecord", "SegmentReportRow", "AnalysisReport",
    "load_segments", "load_summary", "ks_exponentiality", "ci_theta",
    "analyze", "write_report", "ESTIMATOR_ALIASES",
]

# CLI/user tokens -> report keys
ESTIMATOR_ALIASES = {
    "bootstrap": "storey-bootstrap",
    "average": "average",
    "u": "tail-corrected",
    "e": "mean-corrected",
}


@dataclass(frozen=True)
class SegmentRecord:
    """Raw observations for one segment, with optional label columns."""

    segment_id: str
    samples: np.ndarray
    labels: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class SummaryRecord:
    """One row of a precomputed summary: segment, n, pval, del."""

    segment: int
    n: int
    pval: float
    effect: float


@dataclass(frozen=True)
class SegmentReportRow:
    segment: str
    n: int
    scaled_mean: float
    ci_lo: float
    ci_hi: float
    pval: float
    adj_pval: float
    adj_pval_nonadaptive: float
    rejected: dict[float, bool]
    ks_pvalue: float | None
    labels: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class AnalysisReport:
    theta0: float
    q_levels: tuple[float, ...]
    estimator: str
    pi0_estimates: dict[str, float]
    pi0_used: float
    rows: list[SegmentReportRow]
    n_rejected: dict[float, int]
    n_rejected_nonadaptive: dict[float, int]


def _sniff_delimiter(header: str) -> str:
    if "\t" in header:
        return "\t"
    if "," in header:
        return ","
    return " "


def load_segments(path: str | os.PathLike) -> list[SegmentRecord]:
    """Read a long-format file: header ``segment_id,value[,label...]``.

    Comma or tab delimiters are autodetected from the header. Rows are
    grouped by segment in first-appearance order, preserving row order
    within each segment. Nonpositive or malformed values are rejected
    with the offending line number.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if not first.strip():
            raise DataFormatError(f"{path}: empty file")
        delim = _sniff_delimiter(first.rstrip("\n"))
        header = [h.strip() for h in first.rstrip("\n").split(delim)]
        if len(header) < 2 or header[0] != "segment_id" or header[1] != "value":
            raise DataFormatError(
                f"{path}: expected header 'segment_id{delim}value[...]', got {header!r}")
        label_cols = header[2:]

        order: list[str] = []
        samples: dict[str, list[float]] = {}
        labels: dict[str, dict[str, str]] = {}
        reader = csv.reader(fh, delimiter=delim)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataFormatError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            seg = row[0].strip()
            try:
                value = float(row[1])
            except ValueError:
                raise DataFormatError(
                    f"{path}:{lineno}: value {row[1]!r} is not a number") from None
            if not value > 0.0 or not math.isfinite(value):
                raise DataFormatError(
                    f"{path}:{lineno}: value must be a positive finite number, got {value}")
            if seg not in samples:
                order.append(seg)
                samples[seg] = []
                labels[seg] = {c: row[2 + i].strip() for i, c in enumerate(label_cols)}
            samples[seg].append(value)
    if not order:
        raise DataFormatError(f"{path}: no data rows")
    return [SegmentRecord(segment_id=s, samples=np.asarray(samples[s]), labels=labels[s])
            for s in order]


def load_summary(path: str | os.PathLike) -> list[SummaryRecord]:
    """Read a 4-column summary: header ``segment n pval del``.

    Whitespace- or comma-delimited. pval must lie in (0, 1), del must be
    positive, n a positive integer.
    """
    records: list[SummaryRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise DataFormatError(f"{path}: empty file")
    split = (lambda s: [c.strip() for c in s.split(",")]) if "," in lines[0] \
        else (lambda s: s.split())
    header = [h.lower() for h in split(lines[0])]
    if header != ["segment", "n", "pval", "del"]:
        raise DataFormatError(
            f"{path}: expected header 'segment n pval del', got {header!r}")
    for lineno, line in enumerate(lines[1:], start=2):
        parts = split(line)
        if len(parts) != 4:
            raise DataFormatError(f"{path}:{lineno}: expected 4 fields, got {len(parts)}")
        try:
            segment = int(parts[0])
            n = int(parts[1])
            pval = float(parts[2])
            effect = float(parts[3])
        except ValueError:
            raise DataFormatError(f"{path}:{lineno}: malformed row {line!r}") from None
        if n < 1:
            raise DataFormatError(f"{path}:{lineno}: n must be a positive integer")
        if not 0.0 < pval < 1.0:
            raise DataFormatError(f"{path}:{lineno}: pval must lie in (0, 1), got {pval}")
        if not effect > 0.0:
            raise DataFormatError(f"{path}:{lineno}: del must be positive, got {effect}")
        records.append(SummaryRecord(segment=segment, n=n, pval=pval, effect=effect))
    if not records:
        raise DataFormatError(f"{path}: no data rows")
    return records


def _ks_statistic_exponential(x: np.ndarray) -> float:
    """sup-distance between the empirical CDF and Exp(mean of x)."""
    n = x.size
    z = 1.0 - np.exp(-np.sort(x) / x.mean())
    steps = np.arange(1, n + 1) / n
    return float(np.maximum(steps - z, z - (steps - 1.0 / n)).max())


def ks_exponentiality(samples, n_boot: int = 999,
                      rng: np.random.Generator | None = None) -> float:
    """Parametric-bootstrap KS p-value for exponential fit.

    The mean is refit on every bootstrap resample, which calibrates the
    test despite the estimated parameter. Returns
    (1 + #{D_b >= D}) / (n_boot + 1), always in (0, 1].
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1 or x.size < 3:
        raise InvalidParameterError("need at least 3 observations for the KS check")
    if not np.all(x > 0.0):
        raise InvalidParameterError("samples must be positive")
    if n_boot < 99:
        raise InvalidParameterError("n_boot must be at least 99")
    if rng is None:
        rng = np.random.default_rng()
    d_obs = _ks_statistic_exponential(x)
    draws = rng.exponential(x.mean(), size=(n_boot, x.size))
    exceed = sum(_ks_statistic_exponential(row) >= d_obs for row in draws)
    return (1 + exceed) / (n_boot + 1)


def ci_theta(samples, level: float = 0.95) -> tuple[float, float]:
    """Exact CI for an exponential mean from T = 2*sum(x) ~ theta * chi2(2n)."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1 or x.size < 1 or not np.all(x > 0.0):
        raise InvalidParameterError("samples must be a nonempty positive 1-d array")
    if not 0.0 < level < 1.0:
        raise InvalidParameterError(f"level must lie in (0, 1), got {level!r}")
    t = 2.0 * float(x.sum())
    alpha = 1.0 - level
    lo = t / chi2_quantile_upper(alpha / 2.0, 2 * x.size)
    hi = t / chi2_quantile_upper(1.0 - alpha / 2.0, 2 * x.size)
    return (lo, hi)


def _ci_from_summary(n: int, scaled_mean: float, level: float = 0.95) -> tuple[float, float]:
    # on the scaled axis 2*sum(x/theta0) = 2*n*mean, so the CI needs only (n, mean)
    t = 2.0 * n * scaled_mean
    alpha = 1.0 - level
    return (t / chi2_quantile_upper(alpha / 2.0, 2 * n),
            t / chi2_quantile_upper(1.0 - alpha / 2.0, 2 * n))


def _all_estimates(p: np.ndarray, effect_set: EffectSet, seed: int,
                   n_boot: int) -> dict[str, Pi0Estimate]:
    boot = storey_bootstrap(p, n_boot=n_boot, rng=substream(seed, "pi0-boot"))
    return {
        "storey-bootstrap": boot,
        "average": average_estimator(p),
        "tail-corrected": pi0_tail_corrected(p, effect_set, boot),
        "mean-corrected": pi0_mean_corrected(p, effect_set, boot),
    }


def analyze(segments: Sequence[SegmentRecord] | None = None,
            summary: Sequence[SummaryRecord] | None = None,
            theta0: float | None = None,
            q_levels: Sequence[float] = (0.05, 0.1),
            estimator: str = "u",
            seed: int = 20240801,
            ks_boot: int = 999,
            validate: bool = True) -> AnalysisReport:
    """Full analysis: scale, test, estimate pi0, adjust, report.

    Exactly one of ``segments`` / ``summary`` must be given. With raw
    segments, theta0 defaults to the grand mean of all observations and a
    KS exponentiality p-value is attached per segment (failures are
    reported, never fatal). The named ``estimator`` (a key or alias in
    ``ESTIMATOR_ALIASES``; "all" selects the tail-corrected one) drives
    the adjusted p-value column; all four estimates are always reported.
    """
    if (segments is None) == (summary is None):
        raise InvalidParameterError("provide exactly one of segments or summary")
    q_levels = tuple(sorted(float(q) for q in q_levels))
    if any(not 0.0 < q < 1.0 for q in q_levels) or not q_levels:
        raise InvalidParameterError("q levels must lie in (0, 1)")

    if segments is not None:
        if theta0 is None:
            pooled = np.concatenate([s.samples for s in segments])
            theta0 = float(pooled.mean())
        elif not theta0 > 0.0:
            raise InvalidParameterError("theta0 must be positive")
        names = [str(s.segment_id) for s in segments]
        ns = np.array([s.samples.size for s in segments])
        scaled = [s.samples / theta0 for s in segments]
        results = [lrt_one_sample(x, two_sided=True) for x in scaled]
        p = np.array([r.p_value for r in results])
        effects = np.array([r.effect for r in results])
        cis = [ci_theta(x) for x in scaled]
        if validate:
            # segments too small for the KS check are reported without one
            ks = [ks_exponentiality(s.samples, n_boot=ks_boot,
                                    rng=substream(seed, "ks", i))
                  if s.samples.size >= 3 else None
                  for i, s in enumerate(segments)]
        else:
            ks = [None] * len(segments)
        labels = [s.labels for s in segments]
    else:
        if theta0 is None:
            theta0 = 1.0
        names = [str(r.segment) for r in summary]
        ns = np.array([r.n for r in summary])
        p = np.array([r.pval for r in summary])
        effects = np.array([r.effect for r in summary])
        cis = [_ci_from_summary(r.n, r.effect) for r in summary]
        ks = [None] * len(summary)
        labels = [{} for _ in summary]

    effect_set = EffectSet(effects=effects, sizes=ns,
                           problem=TestProblem.ONE_SAMPLE_TWO_SIDED)
    estimates = _all_estimates(p, effect_set, seed, n_boot=100)

    key = ESTIMATOR_ALIASES.get(estimator, estimator)
    if key == "all":
        key = "tail-corrected"
    if key not in estimates:
        raise InvalidParameterError(f"unknown estimator {estimator!r}")
    pi0_used = max(estimates[key].value, 1.0 / p.size)

    adj = bh_adjust(p, pi0_used)
    adj_na = bh_adjust(p, 1.0)
    rejections = {q: reject_at(adj, q) for q in q_levels}
    rejections_na = {q: reject_at(adj_na, q) for q in q_levels}

    rows = []
    for i, name in enumerate(names):
        rows.append(SegmentReportRow(
            segment=name,
            n=int(ns[i]),
            scaled_mean=float(effects[i]),
            ci_lo=float(cis[i][0]),
            ci_hi=float(cis[i][1]),
            pval=float(p[i]),
            adj_pval=float(adj.adjusted[i]),
            adj_pval_nonadaptive=float(adj_na.adjusted[i]),
            rejected={q: bool(adj.adjusted[i] <= q) for q in q_levels},
            ks_pvalue=ks[i],
            labels=labels[i],
        ))
    return AnalysisReport(
        theta0=theta0,
        q_levels=q_levels,
        estimator=key,
        pi0_estimates={k: v.value for k, v in estimates.items()},
        pi0_used=pi0_used,
        rows=rows,
        n_rejected={q: int(r.rejected.size) for q, r in rejections.items()},
        n_rejected_nonadaptive={q: int(r.rejected.size) for q, r in rejections_na.items()},
    )


def _fmt(x: float) -> str:
    return format(x, ".15g")


def write_report(report: AnalysisReport, outdir: str | os.PathLike) -> list[str]:
    """Write pi0_estimates.(csv|json), segments.(csv|json), and plot data.

    Returns the list of files written. Numeric fields are serialized at 15
    significant digits so a reload reproduces the report exactly.
    """
    outdir = str(outdir)
    os.makedirs(os.path.join(outdir, "plots"), exist_ok=True)
    written = []

    path = os.path.join(outdir, "pi0_estimates.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["estimator", "pi0"])
        for k, v in report.pi0_estimates.items():
            w.writerow([k, _fmt(v)])
    written.append(path)

    path = os.path.join(outdir, "pi0_estimates.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"theta0": report.theta0, "estimator": report.estimator,
                   "pi0_used": report.pi0_used,
                   "estimates": report.pi0_estimates}, fh, indent=2)
        fh.write("\n")
    written.append(path)

    q05, q10 = _nearest_levels(report.q_levels)
    path = os.path.join(outdir, "segments.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["segment", "n", "scaled_mean", "ci_lo", "ci_hi", "pval",
                    "adj_pval", "reject_q05", "reject_q10", "ks_pvalue"])
        for r in report.rows:
            w.writerow([r.segment, r.n, _fmt(r.scaled_mean), _fmt(r.ci_lo),
                        _fmt(r.ci_hi), _fmt(r.pval), _fmt(r.adj_pval),
                        int(r.rejected.get(q05, False)), int(r.rejected.get(q10, False)),
                        "" if r.ks_pvalue is None else _fmt(r.ks_pvalue)])
    written.append(path)

    path = os.path.join(outdir, "segments.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([{
            "segment": r.segment, "n": r.n, "scaled_mean": r.scaled_mean,
            "ci_lo": r.ci_lo, "ci_hi": r.ci_hi, "pval": r.pval,
            "adj_pval": r.adj_pval, "adj_pval_nonadaptive": r.adj_pval_nonadaptive,
            "rejected": {str(q): v for q, v in r.rejected.items()},
            "ks_pvalue": r.ks_pvalue, "labels": r.labels,
        } for r in report.rows], fh, indent=2)
        fh.write("\n")
    written.append(path)

    # index vs adjusted p (sorted by raw p), with the cutoff as a column
    path = os.path.join(outdir, "plots", "adjusted_p.csv")
    order = np.argsort([r.pval for r in report.rows], kind="stable")
    q_cut = report.q_levels[-1]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "segment", "adj_pval", "adj_pval_nonadaptive", "q_cutoff"])
        for rank, i in enumerate(order, start=1):
            r = report.rows[i]
            w.writerow([rank, r.segment, _fmt(r.adj_pval),
                        _fmt(r.adj_pval_nonadaptive), _fmt(q_cut)])
    written.append(path)
    return written


def _nearest_levels(q_levels: tuple[float, ...]) -> tuple[float, float]:
    """Map the configured levels onto the report's (q05, q10) columns."""
    q05 = min(q_levels, key=lambda q: abs(q - 0.05))
    q10 = min(q_levels, key=lambda q: abs(q - 0.10))
    return q05, q10
