"""Bootstrap schemes for the raters-by-targets design and the intervals built on them.

Three schemes are available:

* ``nonparametric``: raters, then targets, resampled with replacement.
* ``parametric``: i.i.d. cells from the pooled category shares.
* ``pseudo_population``: the sample is blown up to a pseudo-population of
  the original population size (whole copies plus a without-replacement
  completion), and bootstrap samples are drawn from it without replacement,
  raters first.

Replicates are generated in fixed blocks of :data:`REPLICATE_BLOCK`; block
``b`` always draws from the substream ``(seed, 1 + b)`` so the output does
not depend on how blocks are distributed over workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .index import (
    AgreementEstimate,
    CategoryDistribution,
    DomainError,
    RatingMatrix,
    batch_estimates,
    pooled_distribution,
)
from .inference import IntervalEstimate, _check_level

__all__ = [
    "SCHEMES",
    "REPLICATE_BLOCK",
    "DegenerateResamplingError",
    "BootstrapScheme",
    "BootstrapReplicates",
    "as_seed_sequence",
    "substream",
    "nearest_rank_quantile",
    "resample_nonparametric",
    "resample_parametric",
    "build_pseudo_population",
    "resample_pseudo",
    "bootstrap_distribution",
    "percentile_interval",
    "bootstrap_t_interval",
    "pivotal_interval",
]

SCHEMES = ("nonparametric", "parametric", "pseudo_population")
REPLICATE_BLOCK = 100
MAX_DROPPED_SHARE = 0.10


class DegenerateResamplingError(DomainError):
    """Too many bootstrap replicates had a zero standard error."""


def as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def substream(seed, *keys: int) -> np.random.Generator:
    """Generator for the child ``keys`` of ``seed``, without mutating ``seed``."""
    ss = as_seed_sequence(seed)
    child = np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + tuple(keys))
    return np.random.default_rng(child)


@dataclass(frozen=True)
class BootstrapScheme:
    """Resampling scheme; ``population_sizes=(N_T, N_R)`` is required for the
    pseudo-population scheme and ignored otherwise."""

    kind: str
    population_sizes: tuple[int, int] | None = None

    def __post_init__(self):
        if self.kind not in SCHEMES:
            raise DomainError(f"unknown bootstrap scheme {self.kind!r}; choose from {SCHEMES}")
        if self.kind == "pseudo_population":
            if self.population_sizes is None:
                raise DomainError("pseudo_population scheme needs population_sizes=(N_T, N_R)")
            N_T, N_R = (int(v) for v in self.population_sizes)
            object.__setattr__(self, "population_sizes", (N_T, N_R))

    def check(self, n_T: int, n_R: int) -> None:
        if self.kind == "pseudo_population":
            N_T, N_R = self.population_sizes
            if N_T < n_T or N_R < n_R:
                raise DomainError(
                    f"population sizes ({N_T}, {N_R}) smaller than sample ({n_T}, {n_R})"
                )


@dataclass(frozen=True)
class BootstrapReplicates:
    """Bootstrap values of the unbiased estimate and of its plug-in standard error."""

    estimates: np.ndarray
    std_errors: np.ndarray
    scheme: BootstrapScheme
    seed: object = None

    def __post_init__(self):
        est = np.asarray(self.estimates, dtype=float)
        se = np.asarray(self.std_errors, dtype=float)
        if est.ndim != 1 or est.shape != se.shape or est.size < 1:
            raise DomainError("estimates and std_errors must be equal-length 1-D vectors")
        if np.any(se < 0):
            raise DomainError("negative bootstrap standard error")
        object.__setattr__(self, "estimates", est)
        object.__setattr__(self, "std_errors", se)

    @property
    def B(self) -> int:
        return self.estimates.size


def nearest_rank_quantile(values, q: float) -> float:
    """Sorted value at 1-based rank ``ceil(q * B)`` (at least rank 1)."""
    x = np.sort(np.asarray(values, dtype=float))
    # tolerance keeps e.g. 0.025 * 1000 from rounding up to rank 26
    rank = max(1, math.ceil(q * x.size - 1e-9))
    return float(x[min(rank, x.size) - 1])


# -- single-replicate draws ---------------------------------------------------

def resample_nonparametric(m: RatingMatrix, rng: np.random.Generator) -> RatingMatrix:
    """Raters with replacement, then targets with replacement."""
    cols = rng.integers(0, m.n_R, size=m.n_R)
    rows = rng.integers(0, m.n_T, size=m.n_T)
    return RatingMatrix(m.cells[np.ix_(rows, cols)], m.K)


def resample_parametric(p_hat: CategoryDistribution, n_T: int, n_R: int,
                        rng: np.random.Generator) -> RatingMatrix:
    """``n_T x n_R`` matrix of i.i.d. draws from ``p_hat``."""
    cells = rng.choice(p_hat.K, size=(n_T, n_R), p=p_hat.p) + 1
    return RatingMatrix(cells, p_hat.K)


def _replicate_indices(n: int, N: int, rng: np.random.Generator) -> np.ndarray:
    # floor(N/n) full copies, then N - n*floor(N/n) distinct units without replacement
    k, extra = divmod(N, n)
    base = np.tile(np.arange(n), k)
    if extra:
        base = np.concatenate([base, rng.choice(n, size=extra, replace=False)])
    return np.sort(base, kind="stable")


def build_pseudo_population(m: RatingMatrix, N_T: int, N_R: int,
                            rng: np.random.Generator) -> RatingMatrix:
    """Replicate raters up to ``N_R`` columns, then targets up to ``N_T`` rows."""
    if N_T < m.n_T or N_R < m.n_R:
        raise DomainError(
            f"pseudo-population ({N_T}, {N_R}) smaller than sample ({m.n_T}, {m.n_R})"
        )
    cols = _replicate_indices(m.n_R, N_R, rng)
    step1 = m.cells[:, cols]
    rows = _replicate_indices(m.n_T, N_T, rng)
    return RatingMatrix(step1[rows, :], m.K)


def resample_pseudo(pseudo: RatingMatrix, n_T: int, n_R: int,
                    rng: np.random.Generator) -> RatingMatrix:
    """Without-replacement sample of ``n_R`` raters, then ``n_T`` targets."""
    if n_T > pseudo.n_T or n_R > pseudo.n_R:
        raise DomainError(
            f"cannot draw ({n_T}, {n_R}) from a pseudo-population of shape {pseudo.shape}"
        )
    cols = rng.choice(pseudo.n_R, size=n_R, replace=False)
    rows = rng.choice(pseudo.n_T, size=n_T, replace=False)
    return RatingMatrix(pseudo.cells[np.ix_(rows, cols)], pseudo.K)


# -- vectorized blocks --------------------------------------------------------

def _srswor_batch(rng: np.random.Generator, size: int, N: int, n: int) -> np.ndarray:
    # first n positions of independent random permutations
    return np.argsort(rng.random((size, N)), axis=1)[:, :n]


def _draw_block(cells: np.ndarray, K: int, kind: str, size: int, rng: np.random.Generator,
                n_T: int, n_R: int, p_hat: np.ndarray | None) -> np.ndarray:
    if kind == "nonparametric":
        cols = rng.integers(0, cells.shape[1], size=(size, n_R))
        rows = rng.integers(0, cells.shape[0], size=(size, n_T))
    elif kind == "pseudo_population":
        cols = _srswor_batch(rng, size, cells.shape[1], n_R)
        rows = _srswor_batch(rng, size, cells.shape[0], n_T)
    else:
        return rng.choice(K, size=(size, n_T, n_R), p=p_hat) + 1
    return cells[rows[:, :, None], cols[:, None, :]]


def bootstrap_distribution(m: RatingMatrix, scheme: BootstrapScheme, B: int = 1000,
                           seed=None, workers: int = 1) -> BootstrapReplicates:
    """Draw ``B`` bootstrap samples and record ``d*`` and its plug-in standard error.

    Parameters
    ----------
    m : RatingMatrix
        The observed sample.
    scheme : BootstrapScheme
        Resampling scheme. The pseudo-population is built once from
        substream ``(seed, 0)`` and shared by all replicates.
    B : int
        Number of replicates.
    seed : int or numpy.random.SeedSequence, optional
        Root of all random streams used here.
    workers : int
        Threads over replicate blocks; has no effect on the result.
    """
    if B < 1:
        raise DomainError(f"B must be >= 1, got {B}")
    if m.n_R < 2:
        raise DomainError(f"need at least 2 raters, got {m.n_R}")
    scheme.check(m.n_T, m.n_R)
    ss = as_seed_sequence(seed)

    source = m.cells
    p_hat = None
    if scheme.kind == "pseudo_population":
        N_T, N_R = scheme.population_sizes
        source = build_pseudo_population(m, N_T, N_R, substream(ss, 0)).cells
    elif scheme.kind == "parametric":
        p_hat = pooled_distribution(m).p

    n_blocks = -(-B // REPLICATE_BLOCK)

    def run_block(b: int):
        size = min(REPLICATE_BLOCK, B - b * REPLICATE_BLOCK)
        block = _draw_block(source, m.K, scheme.kind, size, substream(ss, 1 + b),
                            m.n_T, m.n_R, p_hat)
        return batch_estimates(block, m.K)

    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_block, range(n_blocks)))
    else:
        parts = [run_block(b) for b in range(n_blocks)]
    d_star = np.concatenate([p[0] for p in parts])
    se = np.sqrt(np.concatenate([p[1] for p in parts]))
    return BootstrapReplicates(d_star, se, scheme, seed)


# -- interval constructions ---------------------------------------------------

def _tail_quantiles(values, level: float) -> tuple[float, float]:
    alpha = 1.0 - level
    return nearest_rank_quantile(values, alpha / 2.0), nearest_rank_quantile(values, 1.0 - alpha / 2.0)


def percentile_interval(reps: BootstrapReplicates, level: float = 0.95) -> IntervalEstimate:
    """``[Q_{alpha/2}, Q_{1-alpha/2}]`` of the bootstrap estimates."""
    _check_level(level)
    if reps.B < 2:
        raise DomainError(f"percentile interval needs B >= 2, got {reps.B}")
    lo, hi = _tail_quantiles(reps.estimates, level)
    return IntervalEstimate("percentile", lo, hi, level)


def pivotal_interval(reps: BootstrapReplicates, point: AgreementEstimate,
                     level: float = 0.95) -> IntervalEstimate:
    """Percentile interval reflected about the point estimate."""
    _check_level(level)
    if reps.B < 2:
        raise DomainError(f"pivotal interval needs B >= 2, got {reps.B}")
    lo, hi = _tail_quantiles(reps.estimates, level)
    d = point.d_hat_star
    return IntervalEstimate("pivotal", 2.0 * d - hi, 2.0 * d - lo, level)


def bootstrap_t_interval(reps: BootstrapReplicates, point: AgreementEstimate,
                         level: float = 0.95) -> IntervalEstimate:
    """Studentized bootstrap interval ``[d - t_hi * se, d - t_lo * se]``.

    Replicates with a zero standard error are dropped; more than 10% dropped
    raises :class:`DegenerateResamplingError`.
    """
    _check_level(level)
    if point.var_hat <= 0:
        raise DegenerateResamplingError("point estimate has zero standard error")
    keep = reps.std_errors > 0
    dropped = int(reps.B - keep.sum())
    if dropped > MAX_DROPPED_SHARE * reps.B or keep.sum() < 2:
        raise DegenerateResamplingError(
            f"{dropped} of {reps.B} bootstrap replicates have zero standard error"
        )
    d = point.d_hat_star
    z = (reps.estimates[keep] - d) / reps.std_errors[keep]
    t_lo, t_hi = _tail_quantiles(z, level)
    se = math.sqrt(point.var_hat)
    return IntervalEstimate("bootstrap_t", d - t_hi * se, d - t_lo * se, level, n_dropped=dropped)
