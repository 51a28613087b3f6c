"""Exact one-sided Wilcoxon signed-rank test for small paired samples.

The p-value is computed by enumerating all 2^n sign assignments of the ranked
absolute differences (average ranks for ties), so it is exact rather than a
normal approximation; with at most a couple dozen pairs this is instant.
The alternative hypothesis is "A greater than B".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_EXACT_N = 20


@dataclass(frozen=True)
class WilcoxonResult:
    n: int            # pairs remaining after dropping zero differences
    w_plus: float     # sum of ranks of positive differences
    p_value: float


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks starting at 1, ties sharing the average of their positions."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def wilcoxon_one_sided(a, b) -> WilcoxonResult:
    """Test whether paired sample `a` is greater than `b`.

    Zero differences are dropped before ranking; if every difference is zero
    the p-value is defined as 1.0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"need two 1-D samples of equal length, got {a.shape} and {b.shape}")
    if a.size == 0:
        raise ValueError("need at least one pair")
    d = a - b
    d = d[d != 0.0]
    n = d.size
    if n == 0:
        return WilcoxonResult(0, 0.0, 1.0)
    if n > MAX_EXACT_N:
        raise ValueError(f"exact enumeration supports up to {MAX_EXACT_N} nonzero pairs, got {n}")

    ranks = _average_ranks(np.abs(d))
    w_plus = float(ranks[d > 0].sum())

    # all 2^n sign assignments: row k of `signs` is the binary expansion of k
    ks = np.arange(2 ** n, dtype=np.uint32)
    signs = (ks[:, None] >> np.arange(n, dtype=np.uint32)[None, :]) & 1
    stats = signs.astype(np.float64) @ ranks
    p = float(np.count_nonzero(stats >= w_plus)) / float(2 ** n)
    return WilcoxonResult(n, w_plus, p)
