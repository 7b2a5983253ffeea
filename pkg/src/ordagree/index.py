"""Leti dispersion index and the agreement estimators built on it.

Scores are the integers ``1..K``; row ``i`` of a rating matrix holds the
scores given to target ``i`` by each of the ``n_R`` raters.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DomainError",
    "RatingMatrix",
    "CategoryDistribution",
    "AgreementEstimate",
    "empirical_distribution",
    "leti_dispersion",
    "d_max",
    "normalize_d",
    "per_target_dispersion",
    "gini_mean_difference",
    "pooled_distribution",
    "sigma_squared",
    "j_functional",
    "variance_dhat",
    "variance_dhat_asymptotic",
    "estimate_agreement",
    "batch_estimates",
    "theoretical_d",
]

PROB_TOL = 1e-12


class DomainError(ValueError):
    """Raised when an input lies outside the domain of an operation."""


def _check_scores(values: np.ndarray, K: int) -> None:
    if values.size == 0:
        return
    bad = (values < 1) | (values > K)
    if bad.any():
        offending = values[bad].flat[0]
        raise DomainError(f"score {offending} outside the scale 1..{K}")


@dataclass(frozen=True)
class RatingMatrix:
    """Complete targets-by-raters grid of ordinal scores.

    Parameters
    ----------
    cells : array_like, 2-D
        ``cells[i, j]`` is the score of rater ``j`` for target ``i``.
    K : int
        Number of scale levels; every cell must lie in ``1..K``.
    """

    cells: np.ndarray
    K: int

    def __post_init__(self):
        raw = np.asarray(self.cells)
        if raw.ndim != 2:
            raise DomainError(f"rating matrix must be 2-D, got shape {raw.shape}")
        if raw.size and not np.issubdtype(raw.dtype, np.integer):
            if not np.all(np.equal(np.mod(raw, 1), 0)):
                raise DomainError("rating matrix cells must be integers")
        cells = raw.astype(np.int64)
        K = int(self.K)
        if K < 2:
            raise DomainError(f"K must be >= 2, got {K}")
        if cells.shape[0] < 1 or cells.shape[1] < 1:
            raise DomainError(f"rating matrix is empty, shape {cells.shape}")
        _check_scores(cells, K)
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "K", K)

    @property
    def n_T(self) -> int:
        return self.cells.shape[0]

    @property
    def n_R(self) -> int:
        return self.cells.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def reversed_labels(self) -> "RatingMatrix":
        """Recode every score ``k`` as ``K + 1 - k``."""
        return RatingMatrix(self.K + 1 - self.cells, self.K)


@dataclass(frozen=True)
class CategoryDistribution:
    """Probability vector over the ``K`` ordered levels."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).ravel().copy()
        if p.size < 2:
            raise DomainError("a category distribution needs at least 2 levels")
        if np.any(p < 0):
            raise DomainError(f"negative probability in {p}")
        if abs(p.sum() - 1.0) > PROB_TOL * p.size:
            raise DomainError(f"probabilities sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def K(self) -> int:
        return self.p.size

    @property
    def cumulative(self) -> np.ndarray:
        """Cumulative shares ``F_1..F_K`` (``F_K`` is exactly 1)."""
        F = np.cumsum(self.p)
        F[-1] = 1.0
        return F

    @property
    def levels(self) -> np.ndarray:
        return np.arange(1, self.K + 1, dtype=float)


@dataclass(frozen=True)
class AgreementEstimate:
    """Point estimates and plug-in variance for one rating matrix.

    ``d_hat`` is the normalized mean per-target dispersion, ``d_hat_star``
    its unbiased rescaling and ``var_hat`` the plug-in variance of
    ``d_hat_star``.
    """

    d_hat: float
    d_hat_star: float
    var_hat: float
    per_target_D: np.ndarray = field(repr=False)
    n_T: int
    n_R: int
    K: int

    @property
    def se(self) -> float:
        return float(np.sqrt(self.var_hat))

    @property
    def exceeds_one(self) -> bool:
        """True when the bias correction pushed ``d_hat_star`` above 1."""
        return self.d_hat_star > 1.0


def empirical_distribution(row, K: int) -> CategoryDistribution:
    """Relative frequency of each level among the scores in ``row``."""
    x = np.asarray(row).ravel()
    if x.size == 0:
        raise DomainError("cannot build a distribution from an empty row")
    _check_scores(x, K)
    counts = np.bincount(x.astype(np.int64) - 1, minlength=K)
    return CategoryDistribution(counts / x.size)


def leti_dispersion(dist: CategoryDistribution) -> float:
    """``D = 2 * sum_{k<K} F_k (1 - F_k)``."""
    F = dist.cumulative[:-1]
    return float(2.0 * np.sum(F * (1.0 - F)))


def d_max(K: int, N: int | None = None) -> float:
    """Largest attainable Leti dispersion on a ``K``-level scale.

    With ``N`` odd the bound shrinks by ``1 - 1/N**2`` since the mass cannot
    split evenly between the two extreme levels.
    """
    if K < 2:
        raise DomainError(f"K must be >= 2, got {K}")
    base = (K - 1) / 2.0
    if N is None:
        return base
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if N % 2 == 1:
        return base * (1.0 - 1.0 / N**2)
    return base


def normalize_d(D: float, K: int) -> float:
    """Map a dispersion ``D`` to ``[0, 1]`` by dividing by ``(K - 1) / 2``."""
    top = d_max(K)
    if D < 0 or D > top + 1e-9:
        raise DomainError(f"D={D} outside [0, {top}] for K={K}")
    return min(D / top, 1.0)


def per_target_dispersion(row, K: int) -> float:
    """Leti dispersion of the scores one target received."""
    return leti_dispersion(empirical_distribution(row, K))


def gini_mean_difference(row) -> float:
    """Mean absolute difference over all ordered pairs, self-pairs included."""
    x = np.sort(np.asarray(row, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise DomainError("gini_mean_difference of an empty row")
    # sum_{j,j'} |x_j - x_j'| = 2 * sum_j (2j - n - 1) x_(j) over sorted values
    weights = 2.0 * np.arange(1, n + 1) - n - 1
    return float(2.0 * np.dot(weights, x) / n**2)


def pooled_distribution(m: RatingMatrix) -> CategoryDistribution:
    """Share of all cells at each level (mean of the per-row distributions)."""
    counts = np.bincount(m.cells.ravel() - 1, minlength=m.K)
    return CategoryDistribution(counts / m.cells.size)


def sigma_squared(dist: CategoryDistribution) -> float:
    """Variance of the integer score under ``dist``."""
    k = dist.levels
    mean = np.dot(k, dist.p)
    return float(max(np.dot(k * k, dist.p) - mean * mean, 0.0))


def _abs_diff(K: int) -> np.ndarray:
    k = np.arange(K, dtype=float)
    return np.abs(k[:, None] - k[None, :])


def j_functional(dist: CategoryDistribution) -> float:
    """``J = sum_{k,h,l} |k-h||k-l| p_k p_h p_l``, factored as
    ``sum_k p_k (sum_h |k-h| p_h)**2``."""
    inner = _abs_diff(dist.K) @ dist.p
    return float(np.dot(dist.p, inner * inner))


def _variance_core(sigma2, J, D, n_R):
    factor = 1.0 / n_R**2 - 1.0 / n_R**3
    return factor * (4.0 * sigma2 + 4.0 * (n_R - 2) * J - 2.0 * (2 * n_R - 3) * D * D)


def variance_dhat(dist: CategoryDistribution, n_R: int, D: float | None = None) -> float:
    """Exact variance of a per-target dispersion from ``n_R`` i.i.d. scores.

    Parameters
    ----------
    dist : CategoryDistribution
        Common distribution of the scores.
    n_R : int
        Raters per target, at least 2.
    D : float, optional
        Value used in the ``D**2`` term; defaults to ``leti_dispersion(dist)``.
        The plug-in estimator passes a bias-corrected sample value here.
    """
    if n_R < 2:
        raise DomainError(f"n_R must be >= 2, got {n_R}")
    if D is None:
        D = leti_dispersion(dist)
    return float(_variance_core(sigma_squared(dist), j_functional(dist), D, n_R))


def variance_dhat_asymptotic(dist: CategoryDistribution, n_R: int) -> float:
    """Large-``n_R`` approximation ``4 (J - D**2) / n_R``."""
    if n_R < 2:
        raise DomainError(f"n_R must be >= 2, got {n_R}")
    D = leti_dispersion(dist)
    return float(4.0 * (j_functional(dist) - D * D) / n_R)


def theoretical_d(dist: CategoryDistribution) -> float:
    """Normalized dispersion ``d`` of a distribution."""
    return normalize_d(leti_dispersion(dist), dist.K)


def estimate_agreement(m: RatingMatrix) -> AgreementEstimate:
    """Unbiased agreement estimate and plug-in variance for a rating matrix.

    The variance plugs the pooled category shares into the exact
    per-target variance, with the ``D**2`` term evaluated at the
    bias-corrected mean dispersion, then scales to the normalized,
    corrected estimator averaged over ``n_T`` targets.
    """
    if not isinstance(m, RatingMatrix):
        raise TypeError("estimate_agreement expects a RatingMatrix")
    n_T, n_R, K = m.n_T, m.n_R, m.K
    if n_R < 2:
        raise DomainError(f"need at least 2 raters, got {n_R}")
    per_target = np.array([per_target_dispersion(row, K) for row in m.cells])
    top = d_max(K)
    correction = n_R / (n_R - 1)
    D_bar = float(per_target.mean())
    d_hat = D_bar / top
    d_star = d_hat * correction
    V = variance_dhat(pooled_distribution(m), n_R, D=D_bar * correction)
    var_hat = max(correction**2 * V / (top**2 * n_T), 0.0)
    if d_star > 1.0:
        warnings.warn(
            f"bias-corrected estimate {d_star:.4f} exceeds 1 (n_R={n_R})",
            RuntimeWarning,
            stacklevel=2,
        )
    return AgreementEstimate(
        d_hat=d_hat,
        d_hat_star=d_star,
        var_hat=var_hat,
        per_target_D=per_target,
        n_T=n_T,
        n_R=n_R,
        K=K,
    )


def batch_estimates(cells: np.ndarray, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``(d_hat_star, var_hat)`` over a stack of rating matrices.

    ``cells`` has shape ``(..., n_T, n_R)`` with scores in ``1..K``; values
    are not validated. Matches :func:`estimate_agreement` element-wise.
    """
    cells = np.asarray(cells)
    n_T, n_R = cells.shape[-2:]
    if n_R < 2:
        raise DomainError(f"need at least 2 raters, got {n_R}")
    levels = np.arange(1, K + 1, dtype=cells.dtype)
    counts = (cells[..., None] == levels).sum(axis=-2)  # (..., n_T, K)
    F = np.cumsum(counts[..., :-1], axis=-1) / n_R
    D_rows = 2.0 * np.sum(F * (1.0 - F), axis=-1)
    top = (K - 1) / 2.0
    correction = n_R / (n_R - 1)
    D_corr = D_rows.mean(axis=-1) * correction
    d_star = D_corr / top

    p = counts.sum(axis=-2) / (n_T * n_R)  # (..., K)
    k = np.arange(1, K + 1, dtype=float)
    mean = p @ k
    sigma2 = np.maximum(p @ (k * k) - mean * mean, 0.0)
    inner = p @ _abs_diff(K)
    J = np.sum(p * inner * inner, axis=-1)
    V = _variance_core(sigma2, J, D_corr, n_R)
    var_hat = np.maximum(correction**2 * V / (top**2 * n_T), 0.0)
    return d_star, var_hat
