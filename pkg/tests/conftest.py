"""Shared brute-force oracles, kept independent of the library internals."""
from __future__ import annotations

import math

import numpy as np
from hypothesis import settings

settings.register_profile("no-deadline", deadline=None)
settings.load_profile("no-deadline")


def sl_rank_bruteforce(pvalues, level: float) -> int:
    """Direct enumeration of the support-line argmax (largest-k ties)."""
    p = sorted(float(x) for x in pvalues)
    m = len(p)
    objective = [level * k / m - (0.0 if k == 0 else p[k - 1]) for k in range(m + 1)]
    best = max(objective)
    return max(k for k in range(m + 1) if objective[k] == best)


def bh_rank_bruteforce(pvalues, level: float) -> int:
    """Direct enumeration of the step-up rule."""
    p = sorted(float(x) for x in pvalues)
    m = len(p)
    hits = [k for k in range(1, m + 1) if p[k - 1] <= level * k / m]
    return max(hits) if hits else 0


def tssl_ranks_bruteforce(pvalues, level: float) -> tuple[int, int]:
    p = sorted(float(x) for x in pvalues)
    m = len(p)
    r1 = sl_rank_bruteforce(p, level)
    if r1 in (0, m):
        return r1, r1
    objective = [
        level * k / (m - r1) - (0.0 if k == 0 else p[k - 1]) for k in range(m + 1)
    ]
    best = max(objective)
    return r1, max(k for k in range(m + 1) if objective[k] == best)


def tst_ranks_bruteforce(pvalues, level: float) -> tuple[int, int]:
    m = len(pvalues)
    r1 = bh_rank_bruteforce(pvalues, level)
    if r1 in (0, m):
        return r1, r1
    return r1, bh_rank_bruteforce(pvalues, level * m / (m - r1))


def sl_plugin_rank_bruteforce(pvalues, q: float, pi0: float, capped: bool = True) -> int:
    """Direct enumeration of the plug-in argmin (largest-k ties)."""
    p = sorted(float(x) for x in pvalues)
    m = len(p)
    slope = q / (pi0 * m)
    candidates = range(m + 1) if not capped else [
        k for k in range(m + 1) if k == 0 or p[k - 1] <= q
    ]
    objective = {k: (0.0 if k == 0 else p[k - 1]) - slope * k for k in candidates}
    best = min(objective.values())
    return max(k for k in candidates if objective[k] == best)


def lcm_bruteforce(xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least concave majorant of a point set by greedy maximum-slope search.

    From each hull vertex, the next vertex is the point (strictly to the
    right) with the largest chord slope, the farthest such point among
    ties.  Returns the hull vertices.
    """
    hull_x = [xs[0]]
    hull_y = [ys[0]]
    i = 0
    n = len(xs)
    while i < n - 1:
        slopes = [(ys[j] - ys[i]) / (xs[j] - xs[i]) for j in range(i + 1, n)]
        best = max(slopes)
        # farthest point attaining the maximum slope
        j = max(idx for idx, s in enumerate(slopes) if s == best) + i + 1
        hull_x.append(xs[j])
        hull_y.append(ys[j])
        i = j
    return np.array(hull_x), np.array(hull_y)


def grenander_bruteforce(pvalues) -> tuple[np.ndarray, np.ndarray]:
    """(knots, heights) of the decreasing-density MLE via the hull oracle."""
    v = np.sort(np.asarray(pvalues, dtype=float))
    m = v.size
    uniq, counts = np.unique(v, return_counts=True)
    cum = np.cumsum(counts) / m
    if uniq[0] == 0.0:
        uniq, cum = uniq[1:], cum[1:]
    xs = np.concatenate(([0.0], uniq))
    ys = np.concatenate(([0.0], cum))
    if xs[-1] < 1.0:
        xs = np.append(xs, 1.0)
        ys = np.append(ys, 1.0)
    hx, hy = lcm_bruteforce(xs, ys)
    heights = np.diff(hy) / np.diff(hx)
    return hx, heights


def storey_bruteforce(pvalues, lam: float) -> float:
    p = np.asarray(pvalues, dtype=float)
    return (1 + int(np.sum(p > lam))) / (p.size * (1.0 - lam))


def lsl_bruteforce(pvalues) -> int:
    """Lowest-slope m0 estimate by direct slope scanning."""
    p = sorted(float(x) for x in pvalues)
    m = len(p)
    slopes = [(1.0 - (0.0 if i == 0 else p[i - 1])) / (m + 1 - i) for i in range(m + 1)]
    stop = m
    for i in range(1, m + 1):
        if slopes[i] < slopes[i - 1]:
            stop = i
            break
    s = slopes[stop]
    return m if s <= 0 else min(math.ceil(1.0 / s), m)
