#!/usr/bin/env python3
"""Exact one-sided Wilcoxon significance on paired per-dataset accuracies.

The p-value enumerates all 2^n sign assignments of the ranked absolute
differences, so tiny samples (a handful of datasets) get exact answers
instead of a normal approximation.
"""

import numpy as np

from wavegas_lab import wilcoxon_one_sided

# eight paired per-dataset mean accuracies (method A vs baseline B)
baseline = np.array([81.54, 70.87, 78.89, 90.37, 80.42, 90.66, 92.57, 78.78])
method_a = np.array([81.69, 71.13, 79.14, 90.46, 81.34, 90.88, 92.63, 78.79])

diffs = method_a - baseline
print("per-dataset deltas:", np.round(diffs, 2).tolist())
print(f"delta of mean accuracy: {diffs.mean():+.2f}")

res = wilcoxon_one_sided(method_a, baseline)
print(f"\nH1: A greater than B  ->  n={res.n}, W+={res.w_plus:g}, p={res.p_value:.4f}")
print("(all eight differences positive: p = 1/2^8 =", f"{1 / 256:.4f})")

# how the p-value reacts as wins flip to losses
flipped = method_a.copy()
for k in range(4):
    if k:
        flipped[k - 1] = baseline[k - 1] - abs(diffs[k - 1])
    res = wilcoxon_one_sided(flipped, baseline)
    print(f"{k} flipped to negative -> p = {res.p_value:.4f}")
