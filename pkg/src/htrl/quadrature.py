"""Adaptive Simpson quadrature with an absolute error target."""

import math


def adaptive_simpson(f, a, b, tol=1e-10, max_depth=60, min_depth=4):
    """Integrate ``f`` over ``[a, b]``.

    Returns ``(value, error_estimate)``. Uses the classical Richardson
    corrected Simpson rule; intervals are split until the local estimate
    ``|S2 - S1| / 15`` falls below the tolerance share of that interval.
    """
    if b < a:
        v, e = adaptive_simpson(f, b, a, tol, max_depth, min_depth)
        return -v, e
    if b == a:
        return 0.0, 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0
    total = 0.0
    err = 0.0
    # explicit stack keeps deep refinements off the Python recursion limit
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, est, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) * (flo + 4.0 * flm + fmid) / 6.0
        right = (hi - mid) * (fmid + 4.0 * frm + fhi) / 6.0
        delta = left + right - est
        done = depth >= min_depth and abs(delta) <= 15.0 * eps
        if done or depth >= max_depth:
            total += left + right + delta / 15.0
            err += abs(delta) / 15.0
            continue
        stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
    if not math.isfinite(total):
        raise FloatingPointError("integrand produced a non-finite value")
    return total, err
