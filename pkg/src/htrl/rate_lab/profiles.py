"""Localized suprema E_n and F_n = E_n - delta^2 for the interval class, f0 = 0.

For f = c 1_I under the uniform design,
(P_n - P)(2 xi f - f^2) = (2c/n) sum_{x_i in I} xi_i - c^2 (m_I/n - |I|),
and every window of consecutive design points is optimized over c and the
interval length in closed form.
"""

from dataclasses import dataclass

import numpy as np

from .._kernels import en_profile_kernel
from ..estimators import PiecewiseConstantFn, fit_interval_lse, l2_risk


@dataclass(frozen=True)
class ProfileRow:
    delta: float
    E_n: float
    F_n: float


def fn_en_profile(data, deltas, min_len=0.0, level_bound=1.0):
    deltas = np.asarray(deltas, dtype=float)
    if np.any(deltas < 0):
        raise ValueError("deltas must be non-negative")
    if len(data) == 0:
        raise ValueError("empty data")
    en = en_profile_kernel(data.xs, data.ys, float(min_len), deltas, float(level_bound))
    return [ProfileRow(float(d), float(e), float(e - d * d)) for d, e in zip(deltas, en)]


def profile_argmax(rows, eps=1e-12):
    """Smallest grid delta with F_n(delta) >= max F_n - eps.

    F_n is flat wherever several least squares fits share the optimal
    criterion value, so an exact argmax would be decided by rounding.
    """
    f = np.array([r.F_n for r in rows])
    top = f.max()
    return rows[int(np.argmax(f >= top - eps * (1.0 + abs(top))))].delta


def interval_lse_risk(data, min_len=0.0, level_bound=1.0):
    fit = fit_interval_lse(data, min_len, level_bound)
    return l2_risk(fit.fn, PiecewiseConstantFn.constant(0.0, level_bound))


def envelope_violations(rows):
    """Pairs (d1, d2), d1 < d2, with E_n(d1) < F_n(d2) but argmax F_n < d1.

    Any such pair contradicts the localization argument; an empty list is
    expected.
    """
    top = profile_argmax(rows)
    bad = []
    for a, r1 in enumerate(rows):
        for r2 in rows[a + 1:]:
            if r1.delta < r2.delta and r1.E_n < r2.F_n and top < r1.delta:
                bad.append((r1.delta, r2.delta))
    return bad
