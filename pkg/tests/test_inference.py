import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ordagree.index import AgreementEstimate, DomainError
from ordagree.inference import IntervalEstimate, normal_interval, normal_quantile, test_d_leq


def summary(d_star, se, n_R=7):
    return AgreementEstimate(d_star * (n_R - 1) / n_R, d_star, se**2, np.zeros(1), 40, n_R, 6)


def test_quantile_accuracy():
    assert normal_quantile(0.975) == pytest.approx(1.959963984540054, abs=1e-12)
    assert normal_quantile(0.95) == pytest.approx(1.6448536269514722, abs=1e-12)
    assert normal_quantile(0.5) == 0.0
    with pytest.raises(DomainError):
        normal_quantile(1.0)


class TestNormalInterval:
    def test_worked_example(self):
        iv = normal_interval(summary(0.25, 0.05), 0.95)
        assert iv.lower == pytest.approx(0.152, abs=5e-4)
        assert iv.upper == pytest.approx(0.348, abs=5e-4)
        assert (round(iv.lower, 2), round(iv.upper, 2)) == (0.15, 0.35)

    def test_degenerate(self):
        iv = normal_interval(summary(0.3, 0.0))
        assert iv.lower == iv.upper == 0.3

    def test_table1_width(self):
        assert normal_interval(summary(0.61, 0.0408)).length == pytest.approx(0.16, abs=5e-3)

    def test_symmetric(self):
        iv = normal_interval(summary(0.4, 0.07), 0.9)
        assert iv.upper - 0.4 == pytest.approx(0.4 - iv.lower)

    def test_level_validation(self):
        with pytest.raises(DomainError):
            normal_interval(summary(0.4, 0.07), 1.0)

    def test_clip(self):
        iv = normal_interval(summary(0.02, 0.05), clip=True)
        assert iv.lower == 0.0
        raw = normal_interval(summary(0.02, 0.05))
        assert raw.lower < 0

    @given(st.floats(0.01, 0.98), st.floats(0.01, 0.98), st.floats(0, 1), st.floats(0, 0.2))
    def test_nesting(self, a, b, d, se):
        lo, hi = sorted((a, b))
        small, big = normal_interval(summary(d, se), lo), normal_interval(summary(d, se), hi)
        assert big.lower <= small.lower + 1e-15 and small.upper <= big.upper + 1e-15


class TestOneSidedTest:
    def test_reject(self):
        res = test_d_leq(summary(0.25, 0.05), 0.1, 0.05)
        assert res.threshold == pytest.approx(0.1 + 1.6448536 * 0.05)
        assert res.threshold == pytest.approx(0.182, abs=1e-3)
        assert res.reject

    def test_accept_at_estimate(self):
        res = test_d_leq(summary(0.25, 0.05), 0.25, 0.05)
        assert res.threshold == pytest.approx(0.332, abs=1e-3)
        assert not res.reject

    def test_zero_estimate_always_accepts(self):
        for d0 in (0.0, 0.3, 1.0):
            assert not test_d_leq(summary(0.0, 0.0), d0).reject

    def test_validation(self):
        with pytest.raises(DomainError):
            test_d_leq(summary(0.2, 0.1), 1.5)
        with pytest.raises(DomainError):
            test_d_leq(summary(0.2, 0.1), 0.1, alpha=0.7)

    @given(st.floats(0, 1), st.floats(0.001, 0.2), st.floats(0, 1), st.sampled_from([0.01, 0.05, 0.1]))
    def test_duality_with_one_sided_interval(self, d, se, d0, alpha):
        est = summary(d, se)
        lower = d - normal_quantile(1 - alpha) * se
        assert test_d_leq(est, d0, alpha).reject == (d0 < lower)


def test_interval_validation():
    with pytest.raises(DomainError):
        IntervalEstimate("normal", 0.5, 0.4, 0.95)
    with pytest.raises(DomainError):
        IntervalEstimate("bca", 0.1, 0.4, 0.95)
