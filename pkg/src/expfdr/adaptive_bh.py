"""Adaptive Benjamini-Hochberg adjustment and rejection bookkeeping.

``bh_adjust`` computes adjusted p-values min_{j >= i} pi0 * m * p_(j) / j
as a right-to-left running minimum over the sorted p-values (pi0 = 1
recovers classical BH), clamped at 1. Rejection at level q and
false-discovery-proportion scoring against known truth labels live here
too, for the simulation harness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .estimators import as_pvalue_array

__all__ = ["AdjustedPValues", "RejectionSet", "ConfusionCounts",
           "bh_adjust", "reject_at", "confusion"]


@dataclass(frozen=True)
class AdjustedPValues:
    """Adjusted p-values in original input order."""

    adjusted: np.ndarray
    order: np.ndarray  # sorted rank -> original index
    pi0_used: float


@dataclass(frozen=True)
class RejectionSet:
    """Original indices rejected at level q."""

    rejected: np.ndarray
    q: float


@dataclass(frozen=True)
class ConfusionCounts:
    n_rejected: int
    n_false: int
    fdp: float


def bh_adjust(pvals, pi0: float = 1.0) -> AdjustedPValues:
    """Adaptive BH adjusted p-values with multiplier ``pi0 * m``.

    Ties in the p-values are broken by original index (stable sort), and a
    zero pi0 estimate must be floored by the caller (1/m is the
    conventional floor); pi0 = 0 itself is rejected here.
    """
    p = as_pvalue_array(pvals)
    if not 0.0 < pi0 <= 1.0:
        raise InvalidParameterError(f"pi0 must lie in (0, 1], got {pi0!r}")
    m = p.size
    order = np.argsort(p, kind="stable")
    raw = pi0 * m * p[order] / np.arange(1, m + 1)
    adj_sorted = np.minimum(np.minimum.accumulate(raw[::-1])[::-1], 1.0)
    adjusted = np.empty(m)
    adjusted[order] = adj_sorted
    return AdjustedPValues(adjusted=adjusted, order=order, pi0_used=float(pi0))


def reject_at(adj: AdjustedPValues, q: float) -> RejectionSet:
    """Indices whose adjusted p-value is <= q."""
    if not 0.0 < q < 1.0:
        raise InvalidParameterError(f"q must lie in (0, 1), got {q!r}")
    return RejectionSet(rejected=np.nonzero(adj.adjusted <= q)[0], q=float(q))


def confusion(rej: RejectionSet, is_null) -> ConfusionCounts:
    """Count rejections and false discoveries against truth labels.

    ``is_null[i]`` is True when hypothesis i is truly null. FDP is 0 when
    nothing is rejected.
    """
    is_null = np.asarray(is_null, dtype=bool)
    if rej.rejected.size and rej.rejected.max() >= is_null.size:
        raise InvalidParameterError("truth labels shorter than the tested set")
    n_rej = int(rej.rejected.size)
    n_false = int(is_null[rej.rejected].sum()) if n_rej else 0
    return ConfusionCounts(
        n_rejected=n_rej,
        n_false=n_false,
        fdp=(n_false / n_rej) if n_rej else 0.0,
    )
