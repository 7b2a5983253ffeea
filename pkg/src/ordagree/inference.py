"""Normal-approximation intervals and one-sided tests for the agreement index."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from statistics import NormalDist

from .index import AgreementEstimate, DomainError

__all__ = [
    "IntervalEstimate",
    "TestResult",
    "normal_quantile",
    "normal_interval",
    "test_d_leq",
]

METHODS = ("normal", "percentile", "bootstrap_t", "pivotal")

_STD_NORMAL = NormalDist()


def normal_quantile(q: float) -> float:
    """Standard normal quantile (Wichura's AS241 rational approximation)."""
    if not 0.0 < q < 1.0:
        raise DomainError(f"quantile level must be in (0, 1), got {q}")
    return _STD_NORMAL.inv_cdf(q)


def _check_level(level: float) -> None:
    if not 0.0 < level < 1.0:
        raise DomainError(f"confidence level must be in (0, 1), got {level}")


@dataclass(frozen=True)
class IntervalEstimate:
    """Confidence interval ``[lower, upper]`` produced by ``method``.

    ``n_dropped`` counts bootstrap replicates discarded because their
    standard error was zero (bootstrap-t only).
    """

    method: str
    lower: float
    upper: float
    level: float
    n_dropped: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown interval method {self.method!r}")
        _check_level(self.level)
        if not self.lower <= self.upper:
            raise DomainError(f"interval bounds out of order: [{self.lower}, {self.upper}]")

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def clipped(self) -> "IntervalEstimate":
        """Copy with both endpoints clipped to ``[0, 1]`` (for reporting)."""
        lo = min(max(self.lower, 0.0), 1.0)
        hi = min(max(self.upper, 0.0), 1.0)
        return replace(self, lower=lo, upper=hi)


@dataclass(frozen=True)
class TestResult:
    """Outcome of the one-sided test of ``H0: d <= d0``."""

    __test__ = False  # keep pytest from collecting this class

    d0: float
    alpha: float
    threshold: float
    statistic: float
    reject: bool


def normal_interval(est: AgreementEstimate, level: float = 0.95, clip: bool = False) -> IntervalEstimate:
    """Symmetric interval ``d* -/+ z_{1-alpha/2} * se`` around the unbiased estimate."""
    _check_level(level)
    if est.var_hat < 0:
        raise DomainError("negative variance estimate")
    half = normal_quantile(0.5 + level / 2.0) * math.sqrt(est.var_hat)
    out = IntervalEstimate("normal", est.d_hat_star - half, est.d_hat_star + half, level)
    return out.clipped() if clip else out


def test_d_leq(est: AgreementEstimate, d0: float = 0.0, alpha: float = 0.05) -> TestResult:
    """Asymptotic level-``alpha`` test of ``H0: d <= d0`` against ``d > d0``.

    ``H0`` is accepted while ``d*`` stays at or below
    ``d0 + z_{1-alpha} * se``; ``d0 = 0`` tests whether there is any
    disagreement at all.
    """
    if not 0.0 <= d0 <= 1.0:
        raise DomainError(f"d0 must be in [0, 1], got {d0}")
    if not 0.0 < alpha <= 0.5:
        raise DomainError(f"alpha must be in (0, 0.5], got {alpha}")
    threshold = d0 + normal_quantile(1.0 - alpha) * math.sqrt(est.var_hat)
    stat = est.d_hat_star
    return TestResult(d0=d0, alpha=alpha, threshold=threshold, statistic=stat, reject=bool(stat > threshold))


test_d_leq.__test__ = False  # library function, not a pytest test
