"""Measuring absolute agreement with the normalized Leti dispersion index.

Run with ``python3 notebooks/01_leti_index.py``.
"""
import numpy as np

from ordagree import (
    CategoryDistribution,
    RatingMatrix,
    estimate_agreement,
    gini_mean_difference,
    leti_dispersion,
    per_target_dispersion,
    theoretical_d,
    variance_dhat,
)

# Five-point scale, a population distribution concentrated on the middle level.
p = CategoryDistribution([0.1, 0.2, 0.35, 0.25, 0.1])
print("cumulative shares F_k:", p.cumulative)
print("Leti D =", leti_dispersion(p), " normalized d =", theoretical_d(p))

# d is 0 for a point mass and 1 for an even split between the two extremes.
print("point mass d =", theoretical_d(CategoryDistribution([0, 0, 1, 0, 0])))
print("polarized d  =", theoretical_d(CategoryDistribution([0.5, 0, 0, 0, 0.5])))

# Per target, the sample dispersion equals the Gini mean difference of the row.
row = np.array([3, 3, 4, 2, 3, 5, 3])
print("row dispersion:", per_target_dispersion(row, 5), "=", gini_mean_difference(row))

# Estimate from a rating matrix: 50 targets rated by 7 raters.
rng = np.random.default_rng(11)
cells = rng.choice(np.arange(1, 6), size=(50, 7), p=p.p)
est = estimate_agreement(RatingMatrix(cells, K=5))
print(f"d_hat = {est.d_hat:.4f}, bias-corrected d_hat* = {est.d_hat_star:.4f}, se = {est.se:.4f}")
# d_hat* = d_hat * n_R / (n_R - 1) removes the small-row bias of the plug-in index.
print("ratio:", est.d_hat_star / est.d_hat, "= 7/6 =", 7 / 6)

# Exact finite-sample variance of one target's dispersion, for the population above.
print("Var(D_i) with 7 raters:", variance_dhat(p, 7))
