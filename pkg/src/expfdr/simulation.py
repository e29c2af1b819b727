"""Simulation harness: segmented exponential data under a null/alternative
mixture, per-segment tests, pi0 estimation, and adaptive-BH scoring.

Each replication draws m segment means: a floor(m * pi0) subset is fixed
at 1, the rest split between a "poor" law on (0.5, 1) and a "better" law
on (1, 1.5) (uniform or truncated-exponential setting) according to the
allocation percentages. A size-n exponential sample per segment feeds the
configured LRT; the resulting p-values and effect estimates feed all four
pi0 estimators and adaptive BH at level q, scored against the truth.

Replication r consumes the substreams (seed, "rep", r) for data and
(seed, "boot", r) for the bootstrap, so results are independent of
execution order and bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .adaptive_bh import bh_adjust, confusion, reject_at
from .distributions import (
    chi2_sf,
    f_sf,
    sample_exponential,
    sample_truncated_exponential,
    substream,
)
from .errors import InvalidParameterError
from .estimators import (
    EffectSet,
    average_estimator,
    pi0_mean_corrected,
    pi0_tail_corrected,
    storey_bootstrap,
)
from .lrt import P_VALUE_EPS, TestProblem

__all__ = ["SimConfig", "TruthLabels", "ReplicationOutcome", "MetricsRow",
           "ESTIMATOR_KEYS", "gen_theta", "run_replication", "run_study"]

ESTIMATOR_KEYS = ("storey-bootstrap", "average", "tail-corrected", "mean-corrected")
_NON_ADAPTIVE = "non-adaptive"

_POOR_SUPPORT = (0.5, 1.0)
_BETTER_SUPPORT = (1.0, 1.5)


@dataclass(frozen=True)
class SimConfig:
    """One simulation scenario."""

    m: int
    n: int
    pi0: float
    setting: str = "uniform"  # "uniform" | "exponential"
    allocation: tuple[int, int] = (50, 50)  # (poor%, better%) of the non-nulls
    n_reps: int = 1000
    seed: int = 20240801
    q: float = 0.05
    problem: TestProblem = TestProblem.ONE_SAMPLE_TWO_SIDED
    n_boot: int = 100

    def __post_init__(self):
        if self.m < 1 or self.n < 1 or self.n_reps < 1:
            raise InvalidParameterError("m, n, and n_reps must be positive")
        if not 0.0 < self.pi0 < 1.0:
            raise InvalidParameterError(f"pi0 must lie in (0, 1), got {self.pi0!r}")
        if self.setting not in ("uniform", "exponential"):
            raise InvalidParameterError(f"unknown setting {self.setting!r}")
        if sum(self.allocation) != 100 or min(self.allocation) < 0:
            raise InvalidParameterError(
                f"allocation percentages must sum to 100, got {self.allocation!r}")
        if not 0.0 < self.q < 1.0:
            raise InvalidParameterError(f"q must lie in (0, 1), got {self.q!r}")


@dataclass(frozen=True)
class TruthLabels:
    is_null: np.ndarray
    theta: np.ndarray


@dataclass(frozen=True)
class ReplicationOutcome:
    estimates: dict[str, float]
    n_rejected: dict[str, int]
    fdp: dict[str, float]
    n_alternatives: int


@dataclass(frozen=True)
class MetricsRow:
    """Aggregated metrics for one (scenario, estimator) cell."""

    m: int
    n: int
    pi0: float
    setting: str
    allocation: tuple[int, int]
    n_reps: int
    q: float
    estimator: str
    mean_estimate: float
    bias: float
    mse: float
    power: float  # mean rejections / number of false nulls
    rejection_rate: float  # mean rejections / m
    fdr: float  # mean false discovery proportion
    power_nonadaptive: float
    rejection_rate_nonadaptive: float
    fdr_nonadaptive: float


def _open_uniform(rng: np.random.Generator, lo: float, hi: float, size: int) -> np.ndarray:
    """Uniform on the open interval (lo, hi): endpoint draws are redrawn."""
    u = rng.random(size)
    bad = u == 0.0
    while bad.any():
        u[bad] = rng.random(int(bad.sum()))
        bad = u == 0.0
    return lo + (hi - lo) * u


def gen_theta(config: SimConfig, rng: np.random.Generator) -> TruthLabels:
    """Draw the per-segment means: nulls at 1, alternatives off 1.

    The better-count is round(better% * m1); the remainder is poor. The
    open-interval samplers guarantee no alternative equals 1.
    """
    m = config.m
    m0 = int(np.floor(m * config.pi0))
    m1 = m - m0
    is_null = np.zeros(m, dtype=bool)
    is_null[rng.choice(m, size=m0, replace=False)] = True

    n_better = int(round(config.allocation[1] * m1 / 100.0))
    n_poor = m1 - n_better
    if config.setting == "uniform":
        poor = _open_uniform(rng, *_POOR_SUPPORT, n_poor)
        better = _open_uniform(rng, *_BETTER_SUPPORT, n_better)
    else:
        poor = sample_truncated_exponential(1.0, *_POOR_SUPPORT, rng, size=n_poor)
        better = sample_truncated_exponential(1.0, *_BETTER_SUPPORT, rng, size=n_better)

    theta = np.ones(m)
    theta[~is_null] = np.concatenate([poor, better])
    return TruthLabels(is_null=is_null, theta=theta)


def _simulate_tests(config: SimConfig, truth: TruthLabels, rng: np.random.Generator):
    """Vectorized per-segment tests; returns (p-values, effects, sizes)."""
    m, n = config.m, config.n
    problem = config.problem
    x = sample_exponential(1.0, rng, size=(m, n)) * truth.theta[:, None]
    if problem.two_sample:
        ref = sample_exponential(1.0, rng, size=(m, n))
        t = x.mean(axis=1) / ref.mean(axis=1)
        p_star = f_sf(t, 2 * n, 2 * n)
        effects = ((n - 1) / n) * t if n >= 2 else t
        sizes = (n, n)
    else:
        t = 2.0 * x.sum(axis=1)
        p_star = chi2_sf(t, 2 * n)
        effects = x.mean(axis=1)
        sizes = n
    if problem.two_sided:
        p = 2.0 * np.minimum(p_star, 1.0 - p_star)
    else:
        p = p_star
        effects = np.maximum(1.0, effects)
    p = np.clip(p, P_VALUE_EPS, 1.0 - P_VALUE_EPS)
    return p, effects, sizes


def run_replication(config: SimConfig, rep_index: int) -> ReplicationOutcome:
    """One replication: generate, test, estimate, reject, score."""
    data_rng = substream(config.seed, "rep", rep_index)
    boot_rng = substream(config.seed, "boot", rep_index)

    truth = gen_theta(config, data_rng)
    p, effects, sizes = _simulate_tests(config, truth, data_rng)
    effect_set = EffectSet(effects=effects, sizes=sizes, problem=config.problem)

    initial = storey_bootstrap(p, n_boot=config.n_boot, rng=boot_rng)
    estimates = {
        "storey-bootstrap": initial.value,
        "average": average_estimator(p).value,
        "tail-corrected": pi0_tail_corrected(p, effect_set, initial).value,
        "mean-corrected": pi0_mean_corrected(p, effect_set, initial).value,
    }

    n_rejected: dict[str, int] = {}
    fdp: dict[str, float] = {}
    for key, value in list(estimates.items()) + [(_NON_ADAPTIVE, 1.0)]:
        pi0_use = max(value, 1.0 / config.m)  # floor a zero estimate at 1/m
        rej = reject_at(bh_adjust(p, pi0_use), config.q)
        counts = confusion(rej, truth.is_null)
        n_rejected[key] = counts.n_rejected
        fdp[key] = counts.fdp
    return ReplicationOutcome(
        estimates=estimates,
        n_rejected=n_rejected,
        fdp=fdp,
        n_alternatives=int((~truth.is_null).sum()),
    )


def run_study(configs: SimConfig | Iterable[SimConfig],
              progress: bool = False) -> list[MetricsRow]:
    """Run every scenario for its full replication count and aggregate.

    Returns one row per (scenario, estimator). Replications are a
    deterministic fold over the replication index, so any parallel
    execution of the same grid yields identical rows.
    """
    if isinstance(configs, SimConfig):
        configs = [configs]
    rows: list[MetricsRow] = []
    for config in configs:
        acc_est = {k: [] for k in ESTIMATOR_KEYS}
        acc_rej = {k: [] for k in (*ESTIMATOR_KEYS, _NON_ADAPTIVE)}
        acc_fdp = {k: [] for k in (*ESTIMATOR_KEYS, _NON_ADAPTIVE)}
        m1 = 0
        for r in range(config.n_reps):
            out = run_replication(config, r)
            m1 = out.n_alternatives
            for k in ESTIMATOR_KEYS:
                acc_est[k].append(out.estimates[k])
            for k in acc_rej:
                acc_rej[k].append(out.n_rejected[k])
                acc_fdp[k].append(out.fdp[k])
            if progress and (r + 1) % 100 == 0:
                print(f"  {config.setting} pi0={config.pi0} m={config.m} n={config.n}: "
                      f"{r + 1}/{config.n_reps} replications", flush=True)
        m1 = max(m1, 1)
        rej_na = np.asarray(acc_rej[_NON_ADAPTIVE], dtype=float)
        fdr_na = float(np.mean(acc_fdp[_NON_ADAPTIVE]))
        for k in ESTIMATOR_KEYS:
            est = np.asarray(acc_est[k])
            rej = np.asarray(acc_rej[k], dtype=float)
            rows.append(MetricsRow(
                m=config.m, n=config.n, pi0=config.pi0, setting=config.setting,
                allocation=config.allocation, n_reps=config.n_reps, q=config.q,
                estimator=k,
                mean_estimate=float(est.mean()),
                bias=float((est - config.pi0).mean()),
                mse=float(((est - config.pi0) ** 2).mean()),
                power=float((rej / m1).mean()),
                rejection_rate=float((rej / config.m).mean()),
                fdr=float(np.mean(acc_fdp[k])),
                power_nonadaptive=float((rej_na / m1).mean()),
                rejection_rate_nonadaptive=float((rej_na / config.m).mean()),
                fdr_nonadaptive=fdr_na,
            ))
    return rows
