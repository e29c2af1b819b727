"""Estimators for the proportion of true null hypotheses.

Five estimators over a set of p-values in (0, 1):

* ``storey_lambda`` -- the fixed-threshold tail-count estimator
  W(lam) / (m * (1 - lam)), returned unclamped.
* ``storey_bootstrap`` -- bootstrap selection of the threshold over the
  grid {0, 0.05, ..., 0.95}. The bootstrap MSE is taken against the 10th
  percentile of the grid estimates (the qvalue reference implementation);
  ``mse_target="min"`` switches to the minimum-of-grid target described
  in Storey et al. (2004).
* ``average_estimator`` -- mean of the fixed-threshold estimator over
  {0.20, 0.25, ..., 0.50}, clamped at the end.
* ``pi0_tail_corrected`` -- subtracts a conservative model-based estimate
  of the non-null tail probability from the tail-count estimator.
* ``pi0_mean_corrected`` -- same idea applied to the sum-of-p-values
  estimator, using expected non-null p-values.

The two corrected estimators take an initial estimate (conventionally the
bootstrap one), convert it to an assumed alternative count
d = floor(m * (1 - initial)), and average the d smallest per-test tail or
expectation values; with d = 0 they reduce to their uncorrected forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from .errors import InvalidParameterError
from .lrt import TestProblem, expected_nonnull_p_batch, q_upper_batch

__all__ = [
    "Pi0Method",
    "Pi0Estimate",
    "EffectSet",
    "BOOTSTRAP_LAMBDA_GRID",
    "AVERAGE_LAMBDA_GRID",
    "as_pvalue_array",
    "storey_lambda",
    "storey_bootstrap",
    "average_estimator",
    "conservative_tail_average",
    "pi0_tail_corrected",
    "pi0_mean_corrected",
]

BOOTSTRAP_LAMBDA_GRID = np.round(np.arange(0.0, 0.951, 0.05), 2)
AVERAGE_LAMBDA_GRID = np.round(np.arange(0.20, 0.501, 0.05), 2)

# denominators this close to zero mean the correction sits at its null
# ceiling, i.e. no detectable alternatives
_DEGENERATE_DEN = 1e-9


class Pi0Method(Enum):
    STOREY_LAMBDA = "storey-lambda"
    STOREY_BOOTSTRAP = "storey-bootstrap"
    AVERAGE = "average"
    TAIL_CORRECTED = "tail-corrected"
    MEAN_CORRECTED = "mean-corrected"


@dataclass(frozen=True)
class Pi0Estimate:
    """A pi0 estimate in [0, 1] with its method tag and diagnostics."""

    value: float
    method: Pi0Method
    diagnostics: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class EffectSet:
    """Per-test effect estimates with their sample sizes and test problem.

    ``sizes`` is a scalar n (or (n1, n2) pair) shared by all tests, or a
    per-test array: shape (m,) of ints for one-sample problems, shape
    (m, 2) for two-sample ones.
    """

    effects: np.ndarray
    sizes: Any
    problem: TestProblem

    def __post_init__(self):
        effects = np.asarray(self.effects, dtype=np.float64)
        if effects.ndim != 1 or effects.size == 0:
            raise InvalidParameterError("effects must be a nonempty 1-d array")
        if not np.all(effects > 0.0):
            raise InvalidParameterError("all effect estimates must be positive")
        object.__setattr__(self, "effects", effects)

    def _size_groups(self):
        """Yield (sizes, index-array) groups so batched kernels see one df."""
        m = self.effects.size
        sizes = self.sizes
        if self.problem.two_sample:
            arr = np.asarray(sizes)
            if arr.ndim <= 1 and arr.size == 2:
                yield (int(arr.ravel()[0]), int(arr.ravel()[1])), np.arange(m)
                return
            if arr.shape != (m, 2):
                raise InvalidParameterError(
                    "two-sample sizes must be a (n1, n2) pair or an (m, 2) array")
            for pair in np.unique(arr, axis=0):
                mask = np.all(arr == pair, axis=1)
                yield (int(pair[0]), int(pair[1])), np.nonzero(mask)[0]
            return
        arr = np.asarray(sizes)
        if arr.ndim == 0:
            yield int(arr), np.arange(m)
            return
        if arr.shape != (m,):
            raise InvalidParameterError("sizes must be scalar or one entry per test")
        for n in np.unique(arr):
            yield int(n), np.nonzero(arr == n)[0]

    def tail_probabilities(self, lam: float) -> np.ndarray:
        """q_upper at threshold lam for every test."""
        out = np.empty(self.effects.size)
        for sizes, idx in self._size_groups():
            out[idx] = q_upper_batch(self.problem, self.effects[idx], lam, sizes)
        return out

    def expected_pvalues(self) -> np.ndarray:
        """Expected non-null p-value for every test."""
        out = np.empty(self.effects.size)
        for sizes, idx in self._size_groups():
            out[idx] = expected_nonnull_p_batch(self.problem, self.effects[idx], sizes)
        return out


def as_pvalue_array(pvals) -> np.ndarray:
    """Validate and return p-values as a float array; all must be in (0, 1)."""
    p = np.asarray(pvals, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise InvalidParameterError("p-values must form a nonempty 1-d array")
    if not np.all((p > 0.0) & (p < 1.0)):
        raise InvalidParameterError("all p-values must lie strictly in (0, 1)")
    return p


def _clamp01(x):
    return np.clip(x, 0.0, 1.0)


def _grid_estimates(p: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Unclamped storey_lambda over a threshold grid."""
    m = p.size
    counts = (p[:, None] > grid[None, :]).sum(axis=0)
    return counts / (m * (1.0 - grid))


def storey_lambda(pvals, lam: float) -> float:
    """Tail-count estimator W(lam)/(m (1 - lam)); may exceed 1 (unclamped)."""
    p = as_pvalue_array(pvals)
    if not 0.0 < lam < 1.0:
        raise InvalidParameterError(f"lambda must lie in (0, 1), got {lam!r}")
    return float((p > lam).sum() / (p.size * (1.0 - lam)))


def storey_bootstrap(pvals, n_boot: int = 100, rng: np.random.Generator | None = None,
                     mse_target: str = "quantile") -> Pi0Estimate:
    """Bootstrap choice of the Storey threshold over {0, 0.05, ..., 0.95}.

    For each threshold the bootstrap MSE is averaged over ``n_boot``
    resamples (with replacement) of the p-values against a fixed target:
    the 10th percentile of the clamped grid estimates by default, or the
    grid minimum with ``mse_target="min"``. Ties go to the smallest
    threshold. Returns the clamped estimate at the winning threshold.
    """
    p = as_pvalue_array(pvals)
    m = p.size
    if m < 2:
        raise InvalidParameterError("bootstrap needs at least two p-values")
    if n_boot < 1:
        raise InvalidParameterError("n_boot must be >= 1")
    if mse_target not in ("quantile", "min"):
        raise InvalidParameterError(f"unknown mse_target {mse_target!r}")
    if rng is None:
        rng = np.random.default_rng()

    grid = BOOTSTRAP_LAMBDA_GRID
    estimates = _clamp01(_grid_estimates(p, grid))
    target = float(np.quantile(estimates, 0.1)) if mse_target == "quantile" \
        else float(estimates.min())

    idx = rng.integers(0, m, size=(n_boot, m))
    boot_counts = (p[idx][:, :, None] > grid[None, None, :]).sum(axis=1)
    boot_est = _clamp01(boot_counts / (m * (1.0 - grid[None, :])))
    mse = ((boot_est - target) ** 2).mean(axis=0)

    j = int(np.argmin(mse))  # argmin takes the smallest lambda on ties
    return Pi0Estimate(
        value=float(estimates[j]),
        method=Pi0Method.STOREY_BOOTSTRAP,
        diagnostics={"lambda": float(grid[j]), "mse_target": target,
                     "grid_estimates": estimates},
    )


def average_estimator(pvals) -> Pi0Estimate:
    """Mean of storey_lambda over {0.20, ..., 0.50}, clamped to [0, 1]."""
    p = as_pvalue_array(pvals)
    estimates = _grid_estimates(p, AVERAGE_LAMBDA_GRID)
    return Pi0Estimate(
        value=float(_clamp01(estimates.mean())),
        method=Pi0Method.AVERAGE,
        diagnostics={"grid_estimates": estimates},
    )


def conservative_tail_average(values, d: int) -> float:
    """Mean of the d smallest entries; 0.0 when d == 0."""
    values = np.asarray(values, dtype=np.float64)
    if d < 0 or d > values.size:
        raise InvalidParameterError(f"d must lie in [0, {values.size}], got {d}")
    if d == 0:
        return 0.0
    return float(np.sort(values, kind="stable")[:d].mean())


def _initial_value(initial) -> float:
    value = initial.value if isinstance(initial, Pi0Estimate) else float(initial)
    if not 0.0 <= value <= 1.0:
        raise InvalidParameterError(f"initial estimate must lie in [0, 1], got {value!r}")
    return value


def _check_aligned(p: np.ndarray, effects: EffectSet):
    if effects.effects.size != p.size:
        raise InvalidParameterError(
            f"{p.size} p-values vs {effects.effects.size} effects: inputs misaligned")


def pi0_tail_corrected(pvals, effects: EffectSet, initial) -> Pi0Estimate:
    """Bias-corrected tail-count estimator.

    Per threshold lam in {0.20, ..., 0.50}: estimate the non-null tail
    probability by the mean of the d smallest per-test values of
    q_upper(effect_i, lam), then correct the tail-count estimator to
    (W/m - Qhat) / ((1 - lam) - Qhat), clamped per threshold; degenerate
    denominators yield 1.0. The result is the mean over the grid.
    """
    p = as_pvalue_array(pvals)
    _check_aligned(p, effects)
    m = p.size
    init = _initial_value(initial)
    d = int(np.floor(m * (1.0 - init)))

    grid = AVERAGE_LAMBDA_GRID
    per_lambda = np.empty(grid.size)
    q_hat = np.zeros(grid.size)
    for j, lam in enumerate(grid):
        if d > 0:
            q_hat[j] = conservative_tail_average(effects.tail_probabilities(lam), d)
        w_frac = (p > lam).sum() / m
        den = (1.0 - lam) - q_hat[j]
        if den <= _DEGENERATE_DEN:
            per_lambda[j] = 1.0
        else:
            per_lambda[j] = float(_clamp01((w_frac - q_hat[j]) / den))
    return Pi0Estimate(
        value=float(per_lambda.mean()),
        method=Pi0Method.TAIL_CORRECTED,
        diagnostics={"d": d, "initial": init, "q_hat": q_hat,
                     "per_lambda": per_lambda},
    )


def pi0_mean_corrected(pvals, effects: EffectSet, initial) -> Pi0Estimate:
    """Bias-corrected sum-of-p-values estimator.

    Estimates the expected non-null p-value by the mean of the d smallest
    per-test expected p-values, then returns
    clamp((pbar - ehat) / (0.5 - ehat)); a degenerate denominator yields 1.0.
    """
    p = as_pvalue_array(pvals)
    _check_aligned(p, effects)
    m = p.size
    init = _initial_value(initial)
    d = int(np.floor(m * (1.0 - init)))

    e_hat = conservative_tail_average(effects.expected_pvalues(), d) if d > 0 else 0.0
    p_bar = float(p.mean())
    den = 0.5 - e_hat
    value = 1.0 if den <= _DEGENERATE_DEN else float(_clamp01((p_bar - e_hat) / den))
    return Pi0Estimate(
        value=value,
        method=Pi0Method.MEAN_CORRECTED,
        diagnostics={"d": d, "initial": init, "e_hat": e_hat, "p_bar": p_bar},
    )
