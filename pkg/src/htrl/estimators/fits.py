"""Exact least-squares and least-absolute-deviation fits on [0, 1]."""

import numpy as np
from scipy.optimize import isotonic_regression

from .._kernels import (interval_lse_kernel, lad_cost_matrix, segmented_dp_from_costs,
                        segmented_lse_dp)
from ..empirical_process import realize_interval
from .piecewise import FitResult, PiecewiseConstantFn, segments_to_fn


def _check_k(k, n):
    if not 1 <= k <= n:
        raise ValueError(f"segment count k={k} must lie in [1, {n}]")


def fit_interval_lse(data, min_len, level_bound=1.0):
    """Least squares over {c 1_[a,b] : |c| <= level_bound, b - a >= min_len} U {0}.

    Exact O(n^2) scan over design windows. The first optimal window in scan
    order wins; the interval is the shortest admissible one covering it.
    """
    if len(data) == 0:
        raise ValueError("empty data")
    ys = data.ys
    rss0 = float(np.dot(ys, ys))
    zero = FitResult(PiecewiseConstantFn.constant(0.0, level_bound), rss0)
    if min_len > 1:
        return zero
    xs = data.xs
    S = np.concatenate(([0.0], np.cumsum(ys)))
    gain, i, j = interval_lse_kernel(xs, S, float(min_len), float(level_bound))
    if i < 0:
        return zero
    m = j - i + 1
    c = float(np.clip((S[j + 1] - S[i]) / m, -level_bound, level_bound))
    a, b = realize_interval(xs, i, j, min_len)
    if b < 1.0:
        # segments are half-open on the right; keep x_j inside
        b = float(np.nextafter(b, 2.0))
        if j + 1 < len(xs):
            b = min(b, float(xs[j + 1]))
    fn = PiecewiseConstantFn.from_segments([0.0, a, b, 1.0], [0.0, c, 0.0], level_bound)
    return FitResult(fn, max(rss0 - gain, 0.0))


def fit_segmented_lse(data, k, level_bound=1.0):
    """Exact least squares over step functions with at most k bounded levels."""
    n = len(data)
    _check_k(k, n)
    ys = data.ys
    cost, ends = segmented_lse_dp(ys, int(k), float(level_bound))
    starts = np.concatenate(([0], ends[:-1] + 1))
    levels = [np.clip(ys[s:e + 1].mean(), -level_bound, level_bound)
              for s, e in zip(starts, ends)]
    return FitResult(segments_to_fn(data.xs, ends, levels, level_bound), float(cost))


def fit_segmented_lad(data, k, level_bound=1.0):
    """Exact least absolute deviations over step functions with at most k levels.

    Levels are clamped lower medians.
    """
    n = len(data)
    _check_k(k, n)
    ys = data.ys
    cost, lv = lad_cost_matrix(ys, float(level_bound))
    total, ends = segmented_dp_from_costs(cost, int(k))
    starts = np.concatenate(([0], ends[:-1] + 1))
    levels = [lv[s, e] for s, e in zip(starts, ends)]
    return FitResult(segments_to_fn(data.xs, ends, levels, level_bound), float(total), "sad")


def isotonic_levels(data, level_bound=1.0):
    """Isotonic least-squares values at the distinct sorted design points.

    Returns (distinct x, fitted values, counts). Tied design points are
    pooled first so the fit is a function of x.
    """
    if len(data) == 0:
        raise ValueError("empty data")
    ux, inverse, counts = np.unique(data.xs, return_inverse=True, return_counts=True)
    sums = np.bincount(inverse, weights=data.ys)
    res = isotonic_regression(sums / counts, weights=counts.astype(float), increasing=True)
    return ux, np.clip(res.x, -level_bound, level_bound), counts


def fit_isotonic(data, level_bound=1.0):
    """Non-decreasing least squares projected onto the box |f| <= level_bound."""
    ux, fitted, _ = isotonic_levels(data, level_bound)
    bounds = np.concatenate(([0.0], 0.5 * (ux[:-1] + ux[1:]), [1.0]))
    return PiecewiseConstantFn.from_segments(bounds, fitted, level_bound)


def fit_linear_1d(data):
    """Least squares slope through the origin, sum(x y) / sum(x^2).

    ``data`` is anything with array attributes ``x`` and ``y``; the design
    is not restricted to [0, 1] here.
    """
    x = np.asarray(data.x, dtype=float)
    y = np.asarray(data.y, dtype=float)
    sxx = float(np.dot(x, x))
    if sxx == 0.0:
        raise ValueError("degenerate design: all x are zero")
    return float(np.dot(x, y)) / sxx
