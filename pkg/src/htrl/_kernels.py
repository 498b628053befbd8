"""Compiled inner loops shared by the empirical-process and estimator modules."""

import math

import numba
import numpy as np

_jit = numba.njit(cache=True, nogil=True)


@_jit
def window_bounds(x, min_len, max_len):
    """Feasible start range [lo[j], hi[j]] for every window end j.

    A window i..j on sorted design points is realizable by a closed interval
    [a, b] in [0, 1] with min_len <= b - a <= max_len iff
      * x[j] - x[i] <= max_len,
      * left(i) < right(j) - min_len where left(i) = x[i-1] (or 0 when i = 0,
        non-strict) and right(j) = x[j+1] (or 1 when j = n-1, non-strict),
      * no tied design point is split off (x[i-1] < x[i], x[j] < x[j+1]).
    Both bounds are non-decreasing in j. hi[j] < lo[j] means no start.
    """
    n = x.shape[0]
    lo = np.empty(n, np.int64)
    hi = np.empty(n, np.int64)
    p = 0
    h = -1
    for j in range(n):
        while x[j] - x[p] > max_len:
            p += 1
        lo[j] = p
        right = x[j + 1] if j + 1 < n else 1.0
        # advance h while start h+1 has left(h+1) < right - min_len
        while h + 1 <= j:
            s = h + 1
            left = x[s - 1] if s > 0 else 0.0
            ok = right - left > min_len
            if not ok and s == 0 and j == n - 1:
                ok = right - left >= min_len
            if ok:
                h += 1
            else:
                break
        hi[j] = h
    return lo, hi


@_jit
def _valid_starts_ends(x):
    n = x.shape[0]
    vs = np.ones(n, np.bool_)
    ve = np.ones(n, np.bool_)
    for i in range(1, n):
        if x[i - 1] >= x[i]:
            vs[i] = False
            ve[i - 1] = False
    return vs, ve


@_jit
def sup_interval_kernel(x, S, min_len, max_len):
    """Max over feasible windows of |S[j+1] - S[i]| by monotone deques.

    Returns (value, i, j); i = j = -1 when no window is feasible. Ties go to
    the lexicographically smallest (i, j).
    """
    n = x.shape[0]
    lo, hi = window_bounds(x, min_len, max_len)
    vs, ve = _valid_starts_ends(x)
    # the corner window 0..n-1 may satisfy the boundary case only
    qmin = np.empty(n, np.int64)
    qmax = np.empty(n, np.int64)
    a0 = 0
    a1 = 0
    b0 = 0
    b1 = 0
    pushed = 0
    best = -1.0
    bi = -1
    bj = -1
    for j in range(n):
        h = hi[j]
        while pushed <= h:
            if vs[pushed]:
                v = S[pushed]
                while a1 > a0 and S[qmin[a1 - 1]] > v:
                    a1 -= 1
                qmin[a1] = pushed
                a1 += 1
                while b1 > b0 and S[qmax[b1 - 1]] < v:
                    b1 -= 1
                qmax[b1] = pushed
                b1 += 1
            pushed += 1
        lj = lo[j]
        while a1 > a0 and qmin[a0] < lj:
            a0 += 1
        while b1 > b0 and qmax[b0] < lj:
            b0 += 1
        if not ve[j] or a1 == a0 or h < lj:
            continue
        t = S[j + 1]
        i1 = qmin[a0]
        i2 = qmax[b0]
        v1 = t - S[i1]
        v2 = S[i2] - t
        if v1 > v2 or (v1 == v2 and i1 <= i2):
            v = v1
            ii = i1
        else:
            v = v2
            ii = i2
        if v > best or (v == best and ii < bi):
            best = v
            bi = ii
            bj = j
    if bi < 0:
        return 0.0, -1, -1
    return best, bi, bj


@_jit
def interval_lse_kernel(x, S, min_len, bound):
    """Best window for least squares over {c 1_[a,b] : |c| <= bound} U {0}.

    The fit on window i..j with sum s and size m improves the residual sum
    of squares by g = s^2/m (unclamped) or 2 bound |s| - bound^2 m. Returns
    (g, i, j) of the scan-order-first maximizer, (0, -1, -1) for the zero
    fit.
    """
    n = x.shape[0]
    lo, hi = window_bounds(x, min_len, 1.0)
    vs, ve = _valid_starts_ends(x)
    best = 0.0
    bi = -1
    bj = -1
    # start i is admissible for end j iff i <= hi[j]; hi is monotone so the
    # first admissible end for start i is the smallest j with hi[j] >= i
    jstart = 0
    for i in range(n):
        if not vs[i]:
            continue
        while jstart < n and hi[jstart] < i:
            jstart += 1
        base = S[i]
        for j in range(max(i, jstart), n):
            s = S[j + 1] - base
            m = j - i + 1
            # g <= s^2/m always, cheap rejection first
            if s * s <= best * m:
                continue
            if not ve[j]:
                continue
            a = abs(s)
            if a <= bound * m:
                g = s * s / m
            else:
                g = 2.0 * bound * a - bound * bound * m
            if g > best:
                best = g
                bi = i
                bj = j
    return best, bi, bj


@_jit
def _clamped_sq_cost(s, ss, m, bound):
    mean = s / m
    if mean > bound:
        c = bound
    elif mean < -bound:
        c = -bound
    else:
        return ss - s * mean
    return ss - 2.0 * c * s + c * c * m


@_jit
def segmented_lse_dp(y, k, bound):
    """Suffix DP for <= k bounded-level segments under squared loss.

    Returns (cost, ends) where ends lists the last index of each segment.
    Among optimal segmentations the one with the lexicographically smallest
    sequence of segment ends is returned.
    """
    n = y.shape[0]
    S = np.zeros(n + 1)
    Q = np.zeros(n + 1)
    for i in range(n):
        S[i + 1] = S[i] + y[i]
        Q[i + 1] = Q[i] + y[i] * y[i]
    suf = np.full((k + 1, n + 1), np.inf)
    for t in range(k + 1):
        suf[t, n] = 0.0
    for t in range(1, k + 1):
        for i in range(n - 1, -1, -1):
            best = np.inf
            for j in range(i, n):
                c = _clamped_sq_cost(S[j + 1] - S[i], Q[j + 1] - Q[i], j - i + 1, bound)
                v = c + suf[t - 1, j + 1]
                if v < best:
                    best = v
            suf[t, i] = best
    ends = np.empty(k, np.int64)
    cnt = 0
    i = 0
    t = k
    while i < n:
        target = suf[t, i]
        for j in range(i, n):
            c = _clamped_sq_cost(S[j + 1] - S[i], Q[j + 1] - Q[i], j - i + 1, bound)
            if c + suf[t - 1, j + 1] == target:
                break
        ends[cnt] = j
        cnt += 1
        i = j + 1
        t -= 1
    return suf[k, 0], ends[:cnt]


@_jit
def _fenwick_add(tree, pos, val):
    n = tree.shape[0]
    p = pos + 1
    while p < n:
        tree[p] += val
        p += p & (-p)


@_jit
def _fenwick_sum(tree, pos):
    """Sum over positions < pos."""
    out = 0.0
    p = pos
    while p > 0:
        out += tree[p]
        p -= p & (-p)
    return out


@_jit
def _fenwick_kth(cnt_tree, k, log):
    """Smallest position whose prefix count reaches k (1-based k)."""
    pos = 0
    rem = k
    step = log
    n = cnt_tree.shape[0]
    while step > 0:
        nxt = pos + step
        if nxt < n and cnt_tree[nxt] < rem:
            pos = nxt
            rem -= cnt_tree[nxt]
        step >>= 1
    return pos


@_jit
def lad_cost_matrix(y, bound):
    """cost[i, j] = min_{|c|<=bound} sum_{i<=l<=j} |y_l - c| (upper triangle).

    The level is the lower median clamped to [-bound, bound]; order
    statistics come from Fenwick trees over value ranks.
    """
    n = y.shape[0]
    order = np.argsort(y, kind="mergesort")
    rank = np.empty(n, np.int64)
    for r in range(n):
        rank[order[r]] = r
    ys = y[order]
    lo_pos = np.searchsorted(ys, -bound, side="right")
    hi_pos = np.searchsorted(ys, bound, side="right")
    log = 1
    while log * 2 <= n:
        log *= 2
    cost = np.full((n, n), np.inf)
    levels = np.zeros((n, n))
    for i in range(n):
        cnt = np.zeros(n + 1)
        sm = np.zeros(n + 1)
        total = 0.0
        for j in range(i, n):
            _fenwick_add(cnt, rank[j], 1.0)
            _fenwick_add(sm, rank[j], y[j])
            total += y[j]
            m = j - i + 1
            pos = _fenwick_kth(cnt, (m + 1) // 2, log)
            c = ys[pos]
            cut = pos + 1
            if c > bound:
                c = bound
                cut = hi_pos
            elif c < -bound:
                c = -bound
                cut = lo_pos
            nle = _fenwick_sum(cnt, cut)
            sle = _fenwick_sum(sm, cut)
            cost[i, j] = (c * nle - sle) + (total - sle) - c * (m - nle)
            levels[i, j] = c
    return cost, levels


@_jit
def segmented_dp_from_costs(cost, k):
    """Same recursion and tie-break as ``segmented_lse_dp`` on a cost matrix."""
    n = cost.shape[0]
    suf = np.full((k + 1, n + 1), np.inf)
    for t in range(k + 1):
        suf[t, n] = 0.0
    for t in range(1, k + 1):
        for i in range(n - 1, -1, -1):
            best = np.inf
            for j in range(i, n):
                v = cost[i, j] + suf[t - 1, j + 1]
                if v < best:
                    best = v
            suf[t, i] = best
    ends = np.empty(k, np.int64)
    cnt = 0
    i = 0
    t = k
    while i < n:
        target = suf[t, i]
        for j in range(i, n):
            if cost[i, j] + suf[t - 1, j + 1] == target:
                break
        ends[cnt] = j
        cnt += 1
        i = j + 1
        t -= 1
    return suf[k, 0], ends[:cnt]


@_jit
def _phi_window(a, m, n, l_lo, l_hi, d2, bound):
    """sup over c in [0, bound], L in [l_lo, l_hi], c^2 L <= d2 of
    (2 c a - c^2 m) / n + c^2 L."""
    if l_lo > 0.0:
        cmax = min(bound, math.sqrt(d2 / l_lo))
    else:
        cmax = bound
    cb = math.sqrt(d2 / l_hi) if l_hi > 0.0 else np.inf
    cands = np.empty(5)
    cands[0] = 0.0
    cands[1] = cmax
    cands[2] = min(cb, cmax)
    # unconstrained optimum of the branch where c^2 l_hi >= d2
    cands[3] = min(max(a / m, min(cb, cmax)), cmax)
    nc = 4
    curv = m / n - l_hi
    if curv > 0.0:
        cands[4] = min(a / (n * curv), min(cb, cmax))
        nc = 5
    best = 0.0
    for q in range(nc):
        c = cands[q]
        v = (2.0 * c * a - c * c * m) / n + min(c * c * l_hi, d2)
        if v > best:
            best = v
    return best


@_jit
def en_profile_kernel(x, xi, min_len, deltas, bound):
    """E_n(delta) for f in {c 1_I : |c| <= bound, |I| >= min_len}, f0 = 0.

    Windows of consecutive design points are scored in closed form; empty
    intervals inside gaps contribute c^2 |I| on their own.
    """
    n = x.shape[0]
    S = np.zeros(n + 1)
    for i in range(n):
        S[i + 1] = S[i] + xi[i]
    lo, hi = window_bounds(x, min_len, 1.0)
    vs, ve = _valid_starts_ends(x)
    gap = x[0]
    for i in range(1, n):
        gap = max(gap, x[i] - x[i - 1])
    gap = max(gap, 1.0 - x[n - 1])
    nd = deltas.shape[0]
    out = np.zeros(nd)
    for q in range(nd):
        d2 = deltas[q] * deltas[q]
        best = 0.0
        if gap >= min_len:
            best = min(bound * bound * gap, d2)
        for j in range(n):
            if not ve[j]:
                continue
            right = x[j + 1] if j + 1 < n else 1.0
            for i in range(0, min(hi[j], j) + 1):
                if not vs[i]:
                    continue
                left = x[i - 1] if i > 0 else 0.0
                l_lo = max(x[j] - x[i], min_len)
                l_hi = right - left
                a = abs(S[j + 1] - S[i])
                v = _phi_window(a, j - i + 1, n, l_lo, l_hi, d2, bound)
                if v > best:
                    best = v
        out[q] = best
    return out
