"""Why correlation-type indices mislead when ratings crowd the top of the scale.

Run with ``python3 notebooks/04_restriction_of_variance.py``.
"""
import numpy as np

from ordagree import RatingMatrix, compare, estimate_agreement

rng = np.random.default_rng(5)

# Group 1: strong texts, almost every rater gives 5 or 6 on a six-level scale.
l1 = rng.choice([5, 6], size=(20, 7), p=[0.3, 0.7])
# Group 2: weaker texts spread over the scale.
l2 = rng.choice(np.arange(1, 7), size=(20, 7), p=[0.05, 0.1, 0.25, 0.3, 0.2, 0.1])

for label, cells in (("L1", l1), ("L2", l2), ("Total", np.vstack([l1, l2]))):
    m = RatingMatrix(cells, K=6)
    est = estimate_agreement(m)
    rep = compare(m, label)
    print(f"{label:<6} d_hat*={est.d_hat_star:.3f}  r_WG={rep.r_wg_mean:.3f}  "
          f"CV%={rep.cv_mean_percent:.1f}  ICC(A,1)={rep.icc_a1:.3f}")

# In L1 the raters agree almost perfectly (small d, high r_WG), yet ICC(A,1)
# is low because targets barely differ: the between-target variance is restricted.
