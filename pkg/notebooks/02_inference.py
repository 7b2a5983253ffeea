"""Normal-approximation interval and one-sided test for the agreement index.

Run with ``python3 notebooks/02_inference.py``.
"""
import numpy as np

from ordagree import AgreementEstimate, RatingMatrix, estimate_agreement, normal_interval, test_d_leq

# A worked case: d_hat* = 0.25 with standard error 0.05 on 7 raters.
est = AgreementEstimate(d_hat=0.25 * 6 / 7, d_hat_star=0.25, var_hat=0.05**2,
                        per_target_D=np.zeros(1), n_T=40, n_R=7, K=6)
iv = normal_interval(est, level=0.95)
print(f"95% interval: [{iv.lower:.3f}, {iv.upper:.3f}]  (rounds to [{iv.lower:.2f}, {iv.upper:.2f}])")

# H0: d <= d0 is accepted while d_hat* stays under d0 + z_{1-alpha} * se.
for d0 in (0.0, 0.1, 0.25):
    res = test_d_leq(est, d0=d0, alpha=0.05)
    print(f"d0={d0:.2f}: threshold {res.threshold:.3f}, reject={res.reject}")

# Intervals are unclipped by default; clipping is available for reporting.
cells = np.full((10, 5), 3)
cells[0, 0] = 4
tight = estimate_agreement(RatingMatrix(cells, K=5))
print("raw   :", normal_interval(tight))
print("clipped:", normal_interval(tight, clip=True))
