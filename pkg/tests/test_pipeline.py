"""Loaders, KS validation, confidence intervals, and the analyze pipeline."""

import json
import math

import numpy as np
import pytest

from expfdr import (
    DataFormatError,
    InvalidParameterError,
    analyze,
    bh_adjust,
    chi2_quantile_upper,
    ci_theta,
    ks_exponentiality,
    load_segments,
    load_summary,
    sample_exponential,
    substream,
    write_report,
)
from expfdr.pipeline import SegmentRecord


RAW = """segment_id,value,zone,month
A,1200.5,2,APR
A,900.0,2,APR
A,1500.25,2,APR
B,2000.0,4,MAY
B,1750.0,4,MAY
B,2200.0,4,MAY
"""


class TestLoadSegments:
    def test_groups_by_segment(self, tmp_path):
        path = tmp_path / "raw.csv"
        path.write_text(RAW)
        segs = load_segments(path)
        assert [s.segment_id for s in segs] == ["A", "B"]
        assert segs[0].samples.tolist() == [1200.5, 900.0, 1500.25]
        assert segs[1].samples.size == 3

    def test_labels_round_trip(self, tmp_path):
        path = tmp_path / "raw.csv"
        path.write_text(RAW)
        segs = load_segments(path)
        assert segs[0].labels == {"zone": "2", "month": "APR"}
        report = analyze(segments=segs, seed=1, validate=False)
        assert report.rows[0].labels == {"zone": "2", "month": "APR"}

    def test_tab_delimited(self, tmp_path):
        path = tmp_path / "raw.tsv"
        path.write_text("segment_id\tvalue\nS\t3.5\nS\t4.5\n")
        segs = load_segments(path)
        assert segs[0].samples.tolist() == [3.5, 4.5]

    def test_zero_value_named_row(self, tmp_path):
        path = tmp_path / "raw.csv"
        path.write_text("segment_id,value\nA,1.0\nA,0\n")
        with pytest.raises(DataFormatError, match=":3:"):
            load_segments(path)

    def test_malformed_row_has_line_number(self, tmp_path):
        path = tmp_path / "raw.csv"
        path.write_text("segment_id,value\nA,1.0\nA,not-a-number\n")
        with pytest.raises(DataFormatError, match=":3:"):
            load_segments(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "raw.csv"
        path.write_text("id,val\nA,1.0\n")
        with pytest.raises(DataFormatError, match="header"):
            load_segments(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "raw.csv"
        path.write_text("")
        with pytest.raises(DataFormatError):
            load_segments(path)


class TestLoadSummary:
    def test_whitespace_delimited(self, tmp_path):
        path = tmp_path / "summary.txt"
        path.write_text("segment n pval del\n16 34 0.002 1.44\n17 30 0.41 0.98\n")
        recs = load_summary(path)
        assert (recs[0].segment, recs[0].n, recs[0].pval, recs[0].effect) == \
            (16, 34, 0.002, 1.44)

    def test_comma_delimited(self, tmp_path):
        path = tmp_path / "summary.csv"
        path.write_text("segment,n,pval,del\n1,20,0.5,1.0\n")
        assert load_summary(path)[0].n == 20

    def test_missing_column(self, tmp_path):
        path = tmp_path / "summary.txt"
        path.write_text("segment n pval\n1 20 0.5\n")
        with pytest.raises(DataFormatError, match="header"):
            load_summary(path)

    def test_pval_out_of_range(self, tmp_path):
        path = tmp_path / "summary.txt"
        path.write_text("segment n pval del\n1 20 1.5 1.0\n")
        with pytest.raises(DataFormatError, match="pval"):
            load_summary(path)

    def test_nonpositive_effect(self, tmp_path):
        path = tmp_path / "summary.txt"
        path.write_text("segment n pval del\n1 20 0.5 0\n")
        with pytest.raises(DataFormatError, match="del"):
            load_summary(path)

    def test_84_rows(self, tmp_path):
        rng = substream(6, "sum84")
        lines = ["segment n pval del"]
        for i in range(84):
            lines.append(f"{i + 1} 35 {rng.uniform(0.01, 0.99):.4f} "
                         f"{rng.uniform(0.5, 1.5):.4f}")
        path = tmp_path / "auto.txt"
        path.write_text("\n".join(lines) + "\n")
        assert len(load_summary(path)) == 84


class TestKsExponentiality:
    def test_p_in_half_open_interval(self):
        rng = substream(7, "ks")
        x = sample_exponential(1.0, rng, size=40)
        p = ks_exponentiality(x, n_boot=99, rng=substream(7, "ks-b"))
        assert 0.0 < p <= 1.0

    def test_constant_sample_rejects(self):
        p = ks_exponentiality(np.full(30, 2.5), n_boot=99, rng=substream(8, "ks"))
        assert p == pytest.approx(1 / 100)

    def test_calibration_at_level_five_percent(self):
        # exponential data should be rejected at ~the nominal rate
        rng = substream(9, "ks-cal")
        n_trials, rejections = 300, 0
        for i in range(n_trials):
            x = sample_exponential(1.0, rng, size=30)
            p = ks_exponentiality(x, n_boot=99, rng=substream(9, "ks-cal-b", i))
            rejections += p < 0.05
        rate = rejections / n_trials
        assert 0.015 <= rate <= 0.095  # ~4 sd around 0.05

    def test_detects_non_exponential(self):
        rng = substream(10, "ks-alt")
        x = 1.0 + 0.05 * rng.random(60)  # nearly constant, far from exponential
        assert ks_exponentiality(x, n_boot=199, rng=rng) < 0.05

    def test_validation(self):
        with pytest.raises(InvalidParameterError):
            ks_exponentiality([1.0, 2.0], n_boot=99)
        with pytest.raises(InvalidParameterError):
            ks_exponentiality([1.0, 2.0, 3.0], n_boot=10)


class TestCiTheta:
    def test_single_observation_closed_form(self):
        lo, hi = ci_theta([1.0])
        assert lo == pytest.approx(2 / 7.377758908227871, abs=1e-6)
        assert hi == pytest.approx(2 / 0.05063562148434365, abs=1e-3)
        assert lo == pytest.approx(0.2711, abs=2e-4)
        assert hi == pytest.approx(39.498, abs=2e-2)

    def test_scale_equivariance(self):
        x = np.array([1.1, 2.3, 0.7, 3.2])
        lo, hi = ci_theta(x)
        lo4, hi4 = ci_theta(4.0 * x)
        assert lo4 == pytest.approx(4 * lo, rel=1e-12)
        assert hi4 == pytest.approx(4 * hi, rel=1e-12)

    def test_coverage(self):
        # 10^4 exponential samples at theta=1, n=30: ~95% of CIs contain 1
        rng = substream(11, "cov")
        n, trials = 30, 10000
        sums = 2.0 * sample_exponential(1.0, rng, size=(trials, n)).sum(axis=1)
        lo = sums / chi2_quantile_upper(0.025, 2 * n)
        hi = sums / chi2_quantile_upper(0.975, 2 * n)
        rate = float(((lo < 1.0) & (1.0 < hi)).mean())
        assert abs(rate - 0.95) < 0.01

    def test_bounds_ordered(self):
        lo, hi = ci_theta([0.5, 0.8, 1.2], level=0.9)
        assert lo < hi


def _synthetic_segments(n_null, n_poor, n_better, n_obs, theta0, seed):
    rng = substream(seed, "segs")
    segments = []
    thetas = ([theta0] * n_null + [0.5 * theta0] * n_poor + [1.5 * theta0] * n_better)
    for i, theta in enumerate(thetas):
        segments.append(SegmentRecord(
            segment_id=str(i + 1),
            samples=sample_exponential(theta, rng, size=n_obs)))
    return segments


class TestAnalyze:
    def test_identical_null_segments_reject_nothing(self):
        x = np.array([2.0, 3.0, 4.0])
        segs = [SegmentRecord("a", x), SegmentRecord("b", x)]
        report = analyze(segments=segs, theta0=float(x.mean()), validate=False, seed=3)
        assert all(not any(r.rejected.values()) for r in report.rows)

    def test_theta0_defaults_to_grand_mean(self):
        segs = _synthetic_segments(3, 0, 0, 20, 100.0, seed=12)
        report = analyze(segments=segs, validate=False, seed=3)
        pooled = np.concatenate([s.samples for s in segs])
        assert report.theta0 == pytest.approx(pooled.mean())

    def test_summary_with_pi0_one_equals_classical_bh(self):
        # all-large p-values push every estimator to 1.0
        from expfdr.pipeline import SummaryRecord
        rng = substream(13, "sum")
        pvals = 0.5 + 0.49 * rng.random(30)
        summary = [SummaryRecord(i + 1, 30, float(pvals[i]), 1.0 + 0.01 * i)
                   for i in range(30)]
        report = analyze(summary=summary, seed=3)
        assert report.pi0_used == 1.0
        classical = bh_adjust(pvals, 1.0).adjusted
        got = np.array([r.adj_pval for r in report.rows])
        np.testing.assert_allclose(got, classical, rtol=1e-12)
        assert report.n_rejected == report.n_rejected_nonadaptive

    def test_scale_invariance_power_of_two(self):
        segs = _synthetic_segments(4, 2, 2, 15, 50.0, seed=14)
        scaled = [SegmentRecord(s.segment_id, 4.0 * s.samples) for s in segs]
        a = analyze(segments=segs, validate=False, seed=9)
        b = analyze(segments=scaled, validate=False, seed=9)
        assert a.pi0_estimates == b.pi0_estimates
        for ra, rb in zip(a.rows, b.rows):
            assert ra.pval == rb.pval
            assert ra.rejected == rb.rejected
            assert ra.scaled_mean == rb.scaled_mean

    def test_rejections_contain_nonadaptive(self):
        segs = _synthetic_segments(10, 5, 5, 30, 1000.0, seed=15)
        report = analyze(segments=segs, validate=False, seed=9)
        for q in report.q_levels:
            assert report.n_rejected[q] >= report.n_rejected_nonadaptive[q]

    def test_reject_flag_at_05_implies_flag_at_10(self):
        segs = _synthetic_segments(8, 4, 4, 25, 200.0, seed=20)
        report = analyze(segments=segs, validate=False, seed=9)
        for r in report.rows:
            if r.rejected[0.05]:
                assert r.rejected[0.1]

    def test_estimator_selection_and_aliases(self):
        segs = _synthetic_segments(6, 3, 3, 25, 10.0, seed=16)
        for alias, key in (("u", "tail-corrected"), ("e", "mean-corrected"),
                           ("bootstrap", "storey-bootstrap"), ("average", "average")):
            report = analyze(segments=segs, estimator=alias, validate=False, seed=9)
            assert report.estimator == key
        with pytest.raises(InvalidParameterError):
            analyze(segments=segs, estimator="magic", validate=False)

    def test_requires_exactly_one_input(self):
        with pytest.raises(InvalidParameterError):
            analyze()

    def test_ks_column_present_with_validation(self):
        segs = _synthetic_segments(3, 0, 0, 20, 5.0, seed=17)
        report = analyze(segments=segs, seed=9, ks_boot=99)
        assert all(r.ks_pvalue is not None and 0 < r.ks_pvalue <= 1 for r in report.rows)


class TestWriteReport:
    def test_files_and_round_trip(self, tmp_path):
        segs = _synthetic_segments(5, 2, 2, 20, 10.0, seed=18)
        report = analyze(segments=segs, validate=False, seed=9)
        files = write_report(report, tmp_path)
        names = {f.split("/")[-1] for f in files}
        assert {"pi0_estimates.csv", "pi0_estimates.json", "segments.csv",
                "segments.json"} <= names

        with open(tmp_path / "segments.json") as fh:
            rows = json.load(fh)
        for row, orig in zip(rows, report.rows):
            assert row["pval"] == orig.pval  # json floats are exact
            assert row["adj_pval"] == orig.adj_pval

        import csv as _csv
        with open(tmp_path / "segments.csv") as fh:
            reader = _csv.DictReader(fh)
            for row, orig in zip(reader, report.rows):
                # 15-significant-digit text round-trips to the same value
                assert float(row["pval"]) == pytest.approx(orig.pval, rel=1e-14)
                assert float(row["ci_lo"]) == pytest.approx(orig.ci_lo, rel=1e-14)
                assert int(row["reject_q05"]) == int(orig.rejected[0.05])

    def test_adjusted_p_plot_data(self, tmp_path):
        segs = _synthetic_segments(5, 2, 2, 20, 10.0, seed=19)
        report = analyze(segments=segs, validate=False, seed=9)
        write_report(report, tmp_path)
        lines = (tmp_path / "plots" / "adjusted_p.csv").read_text().strip().splitlines()
        assert lines[0] == "index,segment,adj_pval,adj_pval_nonadaptive,q_cutoff"
        assert len(lines) == len(report.rows) + 1
