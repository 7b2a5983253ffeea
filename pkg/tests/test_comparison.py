import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ordagree.comparison import compare, cv_percent, icc_a1, r_wg, uniform_null_variance
from ordagree.index import DomainError, RatingMatrix


def anova_icc_a1(x):
    """ICC(A,1) from sums of squares accumulated cell by cell."""
    x = [list(map(float, r)) for r in x]
    n, k = len(x), len(x[0])
    grand = sum(map(sum, x)) / (n * k)
    row_means = [sum(r) / k for r in x]
    col_means = [sum(x[i][j] for i in range(n)) / n for j in range(k)]
    ss_total = sum((x[i][j] - grand) ** 2 for i in range(n) for j in range(k))
    ss_rows = k * sum((m - grand) ** 2 for m in row_means)
    ss_cols = n * sum((m - grand) ** 2 for m in col_means)
    ss_err = ss_total - ss_rows - ss_cols
    msr, msc, mse = ss_rows / (n - 1), ss_cols / (k - 1), ss_err / ((n - 1) * (k - 1))
    return (msr - mse) / (msr + (k - 1) * mse + k * (msc - mse) / n)


class TestRwg:
    def test_constant_row(self):
        for K in range(2, 10):
            assert r_wg([2, 2, 2], K) == 1

    def test_null_variance(self):
        assert uniform_null_variance(5) == 2

    def test_polarized_row_negative(self):
        assert r_wg([1, 5, 1, 5], 5) == pytest.approx(-5 / 3)
        assert r_wg([1, 5, 1, 5], 5, clamp=True) == 0

    def test_population_divisor(self):
        assert r_wg([1, 5, 1, 5], 5, ddof=0) == pytest.approx(1 - 4 / 2)

    def test_needs_two(self):
        with pytest.raises(DomainError):
            r_wg([3], 5)

    def test_decreasing_in_variance(self):
        rows = [[3, 3, 3, 3], [3, 3, 3, 4], [2, 3, 3, 4], [1, 3, 3, 5], [1, 1, 5, 5]]
        values = [r_wg(r, 5) for r in rows]
        assert all(a > b for a, b in zip(values, values[1:]))


class TestCv:
    def test_examples(self):
        assert cv_percent([4, 4, 4]) == 0
        assert cv_percent([1, 3]) == pytest.approx(100 * math.sqrt(2) / 2)
        assert cv_percent([2, 4, 4, 2]) == pytest.approx(100 * math.sqrt(4 / 3) / 3)

    @given(st.lists(st.floats(0.5, 10), min_size=2, max_size=20), st.floats(0.1, 50))
    def test_scale_free(self, row, c):
        assert cv_percent(np.array(row) * c) == pytest.approx(cv_percent(row), rel=1e-9, abs=1e-9)


class TestIcc:
    def test_perfect_agreement(self):
        assert icc_a1(RatingMatrix([[1, 1], [2, 2], [3, 3]], 3)) == pytest.approx(1.0)

    def test_pure_rater_effect(self):
        assert icc_a1(RatingMatrix([[1, 2], [1, 2], [1, 2]], 2)) == pytest.approx(anova_icc_a1([[1, 2]] * 3))
        assert icc_a1(RatingMatrix([[1, 2], [1, 2], [1, 2]], 2)) == pytest.approx(0.0, abs=1e-15)

    def test_random_matrices_against_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            x = rng.integers(1, 6, size=(6, 3))
            if np.all(x == x[0, 0]):
                continue
            assert icc_a1(x) == pytest.approx(anova_icc_a1(x), abs=1e-10)

    def test_constant_matrix_flagged(self):
        with pytest.warns(RuntimeWarning):
            assert icc_a1(RatingMatrix(np.full((3, 3), 4), 5)) == 1.0

    def test_degenerate_dims(self):
        with pytest.raises(DomainError):
            icc_a1(np.ones((1, 4)))

    def test_affine_invariance(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            x = rng.normal(size=(8, 4))
            base = icc_a1(x)
            assert icc_a1(x + 3.7) == pytest.approx(base, abs=1e-12)
            assert icc_a1(x * 2.5) == pytest.approx(base, abs=1e-12)


def test_compare_report():
    m = RatingMatrix([[5, 5, 6], [6, 6, 6], [5, 6, 6], [5, 5, 5]], 6)
    rep = compare(m, "L1")
    assert rep.group_label == "L1"
    assert rep.r_wg_per_target.shape == (4,) and rep.cv_per_target.shape == (4,)
    assert rep.r_wg_mean == pytest.approx(np.mean([r_wg(r, 6) for r in m.cells]))
    assert -1 <= rep.icc_a1 <= 1
