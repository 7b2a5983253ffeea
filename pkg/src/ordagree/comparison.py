"""Baseline agreement measures: r_WG (uniform null), coefficient of variation,
and the two-way random-effects ICC(A,1)."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .index import DomainError, RatingMatrix

__all__ = [
    "ComparisonReport",
    "uniform_null_variance",
    "r_wg",
    "cv_percent",
    "icc_a1",
    "two_way_mean_squares",
    "compare",
]


def _row(values) -> np.ndarray:
    x = np.asarray(values, dtype=float).ravel()
    if x.size < 2:
        raise DomainError(f"need at least 2 ratings per target, got {x.size}")
    return x


def uniform_null_variance(K: int) -> float:
    """Variance of the discrete uniform distribution on ``1..K``."""
    if K < 2:
        raise DomainError(f"K must be >= 2, got {K}")
    return (K * K - 1) / 12.0


def r_wg(row, K: int, ddof: int = 1, clamp: bool = False) -> float:
    """Within-group agreement ``1 - s**2 / ((K**2 - 1) / 12)``.

    Negative values are returned as is unless ``clamp`` is set.
    """
    x = _row(row)
    value = 1.0 - np.var(x, ddof=ddof) / uniform_null_variance(K)
    return max(value, 0.0) if clamp else float(value)


def cv_percent(row, ddof: int = 1) -> float:
    """Coefficient of variation of one target's ratings, in percent."""
    x = _row(row)
    mean = x.mean()
    if mean <= 0:
        raise DomainError(f"coefficient of variation needs a positive mean, got {mean}")
    return float(100.0 * np.std(x, ddof=ddof) / mean)


def two_way_mean_squares(cells) -> tuple[float, float, float]:
    """Target, rater and residual mean squares of a two-way layout without replication."""
    x = np.asarray(cells, dtype=float)
    n, k = x.shape
    grand = x.mean()
    ms_rows = k * np.sum((x.mean(axis=1) - grand) ** 2) / (n - 1)
    ms_cols = n * np.sum((x.mean(axis=0) - grand) ** 2) / (k - 1)
    resid = x - x.mean(axis=1, keepdims=True) - x.mean(axis=0, keepdims=True) + grand
    ms_err = np.sum(resid**2) / ((n - 1) * (k - 1))
    return float(ms_rows), float(ms_cols), float(ms_err)


def icc_a1(m) -> float:
    """Single-rater absolute-agreement ICC of the two-way random-effects model.

    Accepts a :class:`RatingMatrix` or any real 2-D array (targets in rows).
    When every cell is identical the ratio is 0/0; it is then reported as 1
    with a ``RuntimeWarning``.
    """
    cells = m.cells if isinstance(m, RatingMatrix) else np.asarray(m, dtype=float)
    if cells.ndim != 2 or cells.shape[0] < 2 or cells.shape[1] < 2:
        raise DomainError(f"ICC(A,1) needs at least 2 targets and 2 raters, got shape {cells.shape}")
    n, k = cells.shape
    msr, msc, mse = two_way_mean_squares(cells)
    denom = msr + (k - 1) * mse + k / n * (msc - mse)
    scale = max(abs(msr), abs(msc), abs(mse))
    if denom == 0 or scale == 0 or abs(denom) <= 1e-14 * scale:
        warnings.warn("ICC(A,1) undefined for a constant matrix; reporting 1", RuntimeWarning, stacklevel=2)
        return 1.0
    return float((msr - mse) / denom)


@dataclass(frozen=True)
class ComparisonReport:
    """Baseline indices for one group of targets."""

    r_wg_mean: float
    r_wg_per_target: np.ndarray = field(repr=False)
    cv_mean_percent: float
    cv_per_target: np.ndarray = field(repr=False)
    icc_a1: float
    group_label: str = "Total"


def compare(m: RatingMatrix, group_label: str = "Total", ddof: int = 1,
            clamp_rwg: bool = False) -> ComparisonReport:
    """r_WG, CV% and ICC(A,1) of a rating matrix; CV% and r_WG averaged over targets."""
    rwg = np.array([r_wg(row, m.K, ddof=ddof, clamp=clamp_rwg) for row in m.cells])
    cv = np.array([cv_percent(row, ddof=ddof) for row in m.cells])
    return ComparisonReport(
        r_wg_mean=float(rwg.mean()),
        r_wg_per_target=rwg,
        cv_mean_percent=float(cv.mean()),
        cv_per_target=cv,
        icc_a1=icc_a1(m) if m.n_T >= 2 else float("nan"),
        group_label=group_label,
    )
