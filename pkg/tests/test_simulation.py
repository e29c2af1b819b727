"""Simulation harness: generation contracts, determinism, and metrics."""

import math

import numpy as np
import pytest

from expfdr import (
    InvalidParameterError,
    SimConfig,
    TestProblem,
    gen_theta,
    run_replication,
    run_study,
    substream,
)


def _cfg(**kw):
    base = dict(m=100, n=50, pi0=0.5, setting="uniform", allocation=(50, 50),
                n_reps=10, seed=321, q=0.05)
    base.update(kw)
    return SimConfig(**base)


class TestGenTheta:
    def test_null_count_is_floor(self):
        truth = gen_theta(_cfg(pi0=0.5), substream(1, "t"))
        assert int(truth.is_null.sum()) == 50
        truth = gen_theta(_cfg(m=97, pi0=0.33), substream(1, "t"))
        assert int(truth.is_null.sum()) == int(math.floor(97 * 0.33))

    def test_nulls_are_exactly_one(self):
        truth = gen_theta(_cfg(), substream(2, "t"))
        assert np.all(truth.theta[truth.is_null] == 1.0)
        assert np.all(truth.theta[~truth.is_null] != 1.0)

    def test_uniform_supports_and_split(self):
        truth = gen_theta(_cfg(m=1000, pi0=0.2), substream(3, "t"))
        alt = truth.theta[~truth.is_null]
        assert alt.size == 800
        poor = alt[alt < 1.0]
        better = alt[alt > 1.0]
        assert poor.size == 400 and better.size == 400
        assert np.all((poor > 0.5) & (poor < 1.0))
        assert np.all((better > 1.0) & (better < 1.5))

    def test_allocation_rounding(self):
        truth = gen_theta(_cfg(m=20, pi0=0.5, allocation=(75, 25)), substream(4, "t"))
        alt = truth.theta[~truth.is_null]
        n_better = int((alt > 1.0).sum())
        assert n_better == int(round(0.25 * 10))
        assert alt.size == 10

    def test_exponential_setting_matches_truncated_cdf(self):
        cfg = _cfg(m=200000, pi0=0.05, setting="exponential", allocation=(0, 100))
        truth = gen_theta(cfg, substream(5, "t"))
        draws = np.sort(truth.theta[~truth.is_null])
        lo, hi = 1.0, 1.5
        cdf = (np.exp(-lo) - np.exp(-draws)) / (np.exp(-lo) - np.exp(-hi))
        steps = np.arange(1, draws.size + 1) / draws.size
        d = np.max(np.maximum(steps - cdf, cdf - (steps - 1 / draws.size)))
        assert d < 0.01

    def test_config_validation(self):
        with pytest.raises(InvalidParameterError):
            _cfg(pi0=0.0)
        with pytest.raises(InvalidParameterError):
            _cfg(allocation=(60, 50))
        with pytest.raises(InvalidParameterError):
            _cfg(setting="gamma")


class TestRunReplication:
    def test_deterministic(self):
        cfg = _cfg()
        a = run_replication(cfg, 3)
        b = run_replication(cfg, 3)
        assert a.estimates == b.estimates
        assert a.n_rejected == b.n_rejected
        assert a.fdp == b.fdp

    def test_replications_differ(self):
        cfg = _cfg()
        a = run_replication(cfg, 0)
        b = run_replication(cfg, 1)
        assert a.estimates != b.estimates

    def test_outcome_fields(self):
        out = run_replication(_cfg(), 0)
        for key in ("storey-bootstrap", "average", "tail-corrected", "mean-corrected"):
            assert 0.0 <= out.estimates[key] <= 1.0
            assert out.n_rejected[key] >= out.n_rejected["non-adaptive"] - 0
        assert out.n_alternatives == 50

    def test_adaptive_never_rejects_less(self):
        # rejection sets grow as the BH multiplier shrinks
        cfg = _cfg(pi0=0.3, n_reps=1)
        for r in range(5):
            out = run_replication(cfg, r)
            for key in ("storey-bootstrap", "average", "tail-corrected", "mean-corrected"):
                assert out.n_rejected[key] >= out.n_rejected["non-adaptive"]

    def test_near_degenerate_mixture(self):
        # pi0 ~ 1: estimators land high and the adaptive gain vanishes
        cfg = _cfg(pi0=0.99, m=100, n_reps=1)
        out = run_replication(cfg, 0)
        assert out.n_alternatives == 1
        assert all(v >= 0.8 for v in out.estimates.values())
        for key in ("storey-bootstrap", "average", "tail-corrected", "mean-corrected"):
            assert abs(out.n_rejected[key] - out.n_rejected["non-adaptive"]) <= 1

    def test_two_sample_problem_runs(self):
        cfg = _cfg(problem=TestProblem.TWO_SAMPLE_TWO_SIDED, m=40, n=20, n_reps=1)
        out = run_replication(cfg, 0)
        assert set(out.estimates) == {"storey-bootstrap", "average",
                                      "tail-corrected", "mean-corrected"}


class TestRunStudy:
    def test_rows_and_variance_decomposition(self):
        rows = run_study(_cfg(m=50, n=30, n_reps=50))
        assert len(rows) == 4
        for row in rows:
            assert row.mse >= row.bias**2 - 1e-12
            assert 0.0 <= row.fdr <= 1.0
            assert 0.0 <= row.rejection_rate <= 1.0
            assert row.power >= row.rejection_rate  # m1 <= m

    def test_adaptive_power_dominates(self):
        rows = run_study(_cfg(pi0=0.3, n_reps=50))
        for row in rows:
            assert row.power >= row.power_nonadaptive - 1e-12

    def test_fdr_controlled(self):
        rows = run_study(_cfg(pi0=0.5, n_reps=200))
        bound = 0.05 + 3 * math.sqrt(0.05 / 200)
        for row in rows:
            assert row.fdr <= bound

    def test_bias_correction_orders_low_pi0(self):
        rows = {r.estimator: r for r in run_study(_cfg(pi0=0.2, n_reps=150))}
        assert rows["tail-corrected"].mean_estimate <= rows["storey-bootstrap"].mean_estimate

    def test_grid_of_configs(self):
        rows = run_study([_cfg(pi0=0.3, n_reps=5), _cfg(pi0=0.7, n_reps=5)])
        assert len(rows) == 8
        assert {r.pi0 for r in rows} == {0.3, 0.7}
