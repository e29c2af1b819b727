"""Exact likelihood-ratio tests for exponential means, with non-null p-value
tail probabilities and expected values.

Four problems are supported: one-sample (H0: theta = 1) and two-sample
(H0: theta2 = theta1), each with a one-sided (greater) or two-sided
alternative. The one-sample statistic T = 2*sum(x) is chi-square with 2n
degrees of freedom under the null; the two-sample statistic
T = sum(y)/sum(x) is F with (2*n2, 2*n1). Two-sided p-values are the
equal-tail 2*min(p*, 1-p*).

``q_upper`` gives P(p > lam) for a non-null test with effect ``delta``
(the mean, or the ratio of means); ``expected_nonnull_p`` integrates it
over lam with fixed 64-point Gauss-Legendre quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .distributions import (
    chi2_cdf,
    chi2_quantile_upper,
    chi2_sf,
    f_cdf,
    f_quantile_upper,
    f_sf,
)
from .errors import InvalidParameterError

__all__ = [
    "TestProblem",
    "TestResult",
    "P_VALUE_EPS",
    "lrt_one_sample",
    "lrt_two_sample",
    "q_upper",
    "q_upper_batch",
    "expected_nonnull_p",
    "expected_nonnull_p_batch",
]

# open-interval clamp for boundary p-values (downstream ratios need p in (0,1))
P_VALUE_EPS = 1e-15

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)
_GL_NODES = 0.5 * (_GL_NODES + 1.0)
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS


class TestProblem(Enum):
    """The four exponential LRT problems."""

    ONE_SAMPLE_GREATER = "one-sample-greater"
    ONE_SAMPLE_TWO_SIDED = "one-sample-two-sided"
    TWO_SAMPLE_GREATER = "two-sample-greater"
    TWO_SAMPLE_TWO_SIDED = "two-sample-two-sided"

    @property
    def two_sided(self) -> bool:
        return self in (TestProblem.ONE_SAMPLE_TWO_SIDED, TestProblem.TWO_SAMPLE_TWO_SIDED)

    @property
    def two_sample(self) -> bool:
        return self in (TestProblem.TWO_SAMPLE_GREATER, TestProblem.TWO_SAMPLE_TWO_SIDED)


@dataclass(frozen=True)
class TestResult:
    """One test's p-value, effect-size estimate, and sample size(s)."""

    p_value: float
    effect: float
    n: int | tuple[int, int]
    problem: TestProblem


def _clamp_p(p: float) -> float:
    return min(max(p, P_VALUE_EPS), 1.0 - P_VALUE_EPS)


def _check_sample(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise InvalidParameterError(f"{name} must be a nonempty 1-d sample")
    if not np.all(x > 0.0):
        raise InvalidParameterError(f"{name} must be strictly positive")
    return x


def lrt_one_sample(x, two_sided: bool = True) -> TestResult:
    """LRT of H0: theta = 1 from an exponential sample (already scaled).

    One-sided alternative is theta > 1; the one-sided effect estimate is
    clamped to max(1, mean) so it stays in the alternative region.
    """
    x = _check_sample(x, "x")
    n = x.size
    t = 2.0 * float(x.sum())
    p_star = chi2_sf(t, 2 * n)
    if two_sided:
        p = 2.0 * min(p_star, 1.0 - p_star)
        effect = float(x.mean())
        problem = TestProblem.ONE_SAMPLE_TWO_SIDED
    else:
        p = p_star
        effect = max(1.0, float(x.mean()))
        problem = TestProblem.ONE_SAMPLE_GREATER
    return TestResult(_clamp_p(p), effect, n, problem)


def lrt_two_sample(x, y, two_sided: bool = True) -> TestResult:
    """LRT of H0: theta_y = theta_x from two exponential samples.

    The statistic is the mean ratio mean(y)/mean(x), which is exactly
    (theta_y/theta_x) * F(2*n2, 2*n1) for any sample sizes (the raw sum
    ratio is F-pivotal only when n1 == n2). The effect estimate applies
    the (n1-1)/n1 unbiasing factor for n1 >= 2; with n1 == 1 the factor
    would vanish, so the raw mean ratio (the MLE) is used instead.
    """
    x = _check_sample(x, "x")
    y = _check_sample(y, "y")
    n1 = x.size
    n2 = y.size
    t = float(y.mean()) / float(x.mean())
    p_star = f_sf(t, 2 * n2, 2 * n1)
    factor = (n1 - 1) / n1 if n1 >= 2 else 1.0
    if two_sided:
        p = 2.0 * min(p_star, 1.0 - p_star)
        effect = factor * t
        problem = TestProblem.TWO_SAMPLE_TWO_SIDED
    else:
        p = p_star
        effect = max(1.0, factor * t)
        problem = TestProblem.TWO_SAMPLE_GREATER
    return TestResult(_clamp_p(p), effect, (n1, n2), problem)


def _sizes_to_df(problem: TestProblem, sizes) -> tuple[int, ...]:
    if problem.two_sample:
        try:
            n1, n2 = sizes
        except (TypeError, ValueError):
            raise InvalidParameterError(
                f"{problem.value} needs sizes=(n1, n2), got {sizes!r}") from None
        if n1 < 1 or n2 < 1:
            raise InvalidParameterError("sample sizes must be >= 1")
        return (2 * int(n2), 2 * int(n1))  # F(2*n2, 2*n1)
    n = int(sizes) if np.ndim(sizes) == 0 else int(np.asarray(sizes).item())
    if n < 1:
        raise InvalidParameterError("sample size must be >= 1")
    return (2 * n,)


@lru_cache(maxsize=None)
def _upper_quantile(problem: TestProblem, lam: float, dfs: tuple[int, ...]) -> float:
    if problem.two_sample:
        return f_quantile_upper(lam, dfs[0], dfs[1])
    return chi2_quantile_upper(lam, dfs[0])


def _cdf(problem: TestProblem, x, dfs: tuple[int, ...]):
    if problem.two_sample:
        return f_cdf(x, dfs[0], dfs[1])
    return chi2_cdf(x, dfs[0])


def q_upper(problem: TestProblem, delta: float, lam: float, sizes) -> float:
    """P(p > lam) for a non-null p-value with effect size ``delta``.

    ``sizes`` is n for one-sample problems, (n1, n2) for two-sample.
    """
    if not delta > 0.0:
        raise InvalidParameterError(f"delta must be positive, got {delta!r}")
    if not 0.0 < lam < 1.0:
        raise InvalidParameterError(f"lambda must lie in (0, 1), got {lam!r}")
    dfs = _sizes_to_df(problem, sizes)
    if problem.two_sided:
        hi = _upper_quantile(problem, lam / 2.0, dfs)
        lo = _upper_quantile(problem, 1.0 - lam / 2.0, dfs)
        return float(_cdf(problem, hi / delta, dfs) - _cdf(problem, lo / delta, dfs))
    q = _upper_quantile(problem, lam, dfs)
    return float(_cdf(problem, q / delta, dfs))


def q_upper_batch(problem: TestProblem, deltas, lam: float, sizes) -> np.ndarray:
    """Vectorized ``q_upper`` over an array of effect sizes (common sizes)."""
    deltas = np.asarray(deltas, dtype=np.float64)
    if not np.all(deltas > 0.0):
        raise InvalidParameterError("all deltas must be positive")
    if not 0.0 < lam < 1.0:
        raise InvalidParameterError(f"lambda must lie in (0, 1), got {lam!r}")
    dfs = _sizes_to_df(problem, sizes)
    if problem.two_sided:
        hi = _upper_quantile(problem, lam / 2.0, dfs)
        lo = _upper_quantile(problem, 1.0 - lam / 2.0, dfs)
        return _cdf(problem, hi / deltas, dfs) - _cdf(problem, lo / deltas, dfs)
    q = _upper_quantile(problem, lam, dfs)
    return _cdf(problem, q / deltas, dfs)


@lru_cache(maxsize=None)
def _node_quantiles(problem: TestProblem, dfs: tuple[int, ...]):
    """Upper quantiles at the Gauss-Legendre nodes, cached per problem/df."""
    if problem.two_sided:
        hi = np.array([_upper_quantile(problem, lam / 2.0, dfs) for lam in _GL_NODES])
        lo = np.array([_upper_quantile(problem, 1.0 - lam / 2.0, dfs) for lam in _GL_NODES])
        return hi, lo
    q = np.array([_upper_quantile(problem, lam, dfs) for lam in _GL_NODES])
    return (q,)


def expected_nonnull_p(problem: TestProblem, delta: float, sizes) -> float:
    """Expected non-null p-value e_delta = integral of q_upper over (0, 1)."""
    if not delta > 0.0:
        raise InvalidParameterError(f"delta must be positive, got {delta!r}")
    return float(expected_nonnull_p_batch(problem, np.array([delta]), sizes)[0])


def expected_nonnull_p_batch(problem: TestProblem, deltas, sizes) -> np.ndarray:
    """Vectorized ``expected_nonnull_p`` over effect sizes (common sizes)."""
    deltas = np.asarray(deltas, dtype=np.float64)
    if not np.all(deltas > 0.0):
        raise InvalidParameterError("all deltas must be positive")
    dfs = _sizes_to_df(problem, sizes)
    nodes = _node_quantiles(problem, dfs)
    inv = 1.0 / deltas[:, None]
    if problem.two_sided:
        qmat = (_cdf(problem, nodes[0][None, :] * inv, dfs)
                - _cdf(problem, nodes[1][None, :] * inv, dfs))
    else:
        qmat = _cdf(problem, nodes[0][None, :] * inv, dfs)
    return qmat @ _GL_WEIGHTS
