"""Suprema of (multiplier) empirical processes over interval indicators.

The class is {1_[a,b] : 0 <= a <= b <= 1} optionally restricted to lengths
in [min_len, max_len]. Under the uniform design P f^2 = b - a, so max_len
plays the role of a squared localization radius.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ._kernels import sup_interval_kernel
from .noise_models import mean_stderr
from .rng import make_rng


@dataclass(frozen=True)
class IntervalConstraint:
    min_len: float = 0.0
    max_len: float = 1.0

    def __post_init__(self):
        if self.min_len < 0 or self.max_len > 1:
            raise ValueError(f"need 0 <= min_len and max_len <= 1, got {self}")
        if self.min_len > self.max_len:
            raise ValueError(f"min_len exceeds max_len in {self}")

    @classmethod
    def localized(cls, delta):
        """Intervals with P f^2 <= delta^2."""
        return cls(0.0, min(1.0, delta * delta))


UNCONSTRAINED = IntervalConstraint()


@dataclass(frozen=True)
class DesignSample:
    """Sorted design points in [0, 1] paired with weights."""

    x: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        w = np.asarray(self.w, dtype=float)
        if x.shape != w.shape or x.ndim != 1:
            raise ValueError("x and w must be 1-d arrays of equal length")
        if x.size and (x[0] < 0 or x[-1] > 1):
            raise ValueError("design points must lie in [0, 1]")
        if np.any(np.diff(x) < 0):
            raise ValueError("design points must be sorted")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "w", w)

    @classmethod
    def from_unsorted(cls, x, w):
        x = np.asarray(x, dtype=float)
        order = np.argsort(x, kind="stable")
        return cls(x[order], np.asarray(w, dtype=float)[order])

    def prefix_sums(self):
        return np.concatenate(([0.0], np.cumsum(self.w)))


@dataclass(frozen=True)
class IntervalSup:
    value: float
    interval: tuple | None
    window: tuple | None


def realize_interval(x, i, j, min_len):
    """Shortest closed interval covering exactly x[i..j] with length >= min_len.

    The extension beyond [x[i], x[j]] is centred when possible and pushed
    inside the open gaps to the neighbouring design points.
    """
    n = len(x)
    core = x[j] - x[i]
    if core >= min_len:
        return float(x[i]), float(x[j])
    length = min_len
    left = x[i - 1] if i > 0 else 0.0
    right = x[j + 1] if j + 1 < n else 1.0
    a_lo = max(left, x[j] - length)
    a_hi = min(x[i], right - length)
    a = min(max(x[i] - 0.5 * (length - core), a_lo), a_hi)
    strict_left = i > 0 and a <= left
    strict_right = j + 1 < n and a + length >= right
    if strict_left or strict_right:
        a = 0.5 * (a_lo + a_hi)
    # guard against rounding pushing an end point past x[i] or x[j]
    return float(min(a, x[i])), float(max(a + length, x[j]))


def sup_interval_sum(sample, c=UNCONSTRAINED):
    """Exact sup over admissible intervals of |sum_i w_i 1[x_i in I]|."""
    if len(sample.x) == 0:
        raise ValueError("empty sample")
    if c.min_len > 1:
        raise ValueError("min_len > 1 is infeasible")
    S = sample.prefix_sums()
    value, i, j = sup_interval_kernel(sample.x, S, float(c.min_len), float(c.max_len))
    if i < 0:
        return IntervalSup(0.0, None, None)
    return IntervalSup(float(value), realize_interval(sample.x, i, j, c.min_len), (int(i), int(j)))


def _sup_draws(n, c, reps, seed, draw_weights):
    vals = np.empty(reps)
    for r in range(reps):
        rng = make_rng(seed, n, r)
        x = np.sort(rng.random(n))
        w = draw_weights(rng, n)
        S = np.concatenate(([0.0], np.cumsum(w)))
        vals[r] = sup_interval_kernel(x, S, float(c.min_len), float(c.max_len))[0]
    return vals


def rademacher_sup_mc(n, c=UNCONSTRAINED, reps=200, seed=0):
    """MC estimate of E sup_I |sum eps_i 1[X_i in I]| with X uniform on [0, 1]."""
    if n < 1 or reps < 1:
        raise ValueError("n and reps must be >= 1")
    return mean_stderr(_sup_draws(n, c, reps, seed,
                                  lambda rng, k: rng.integers(0, 2, k) * 2.0 - 1.0))


def multiplier_sup_mc(law, n, c=UNCONSTRAINED, reps=200, seed=0):
    """MC estimate of E sup_I |sum xi_i 1[X_i in I]|, xi drawn independently of X.

    ``law`` only needs a ``draw(rng, n)`` method.
    """
    if n < 1 or reps < 1:
        raise ValueError("n and reps must be >= 1")
    return mean_stderr(_sup_draws(n, c, reps, seed, law.draw))


# -- concave majorants ----------------------------------------------------

@dataclass(frozen=True)
class ConcaveMajorant:
    """Piecewise-linear, non-decreasing, concave; flat after the last knot."""

    k: np.ndarray
    value: np.ndarray

    def __call__(self, t):
        return np.interp(t, self.k, self.value)

    @property
    def slopes(self):
        return np.diff(self.value) / np.diff(self.k)

    def knots(self):
        return list(zip(self.k.tolist(), self.value.tolist()))


def least_concave_majorant(points):
    """Smallest non-decreasing concave function above ``points``.

    ``points`` is a sequence of (k, value) with k >= 0 and value >= 0; the
    origin is added when missing. Upper hull by a monotone chain, then the
    part after the maximum is flattened.
    """
    pts = sorted((float(k), float(v)) for k, v in points)
    if any(v < 0 for _, v in pts) or any(k < 0 for k, _ in pts):
        raise ValueError("points must have non-negative coordinates")
    merged = {}
    for k, v in pts:
        merged[k] = max(v, merged.get(k, -math.inf))
    merged.setdefault(0.0, 0.0)
    pts = sorted(merged.items())
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point unless it lies strictly above the chord
            if (y2 - y1) * (p[0] - x1) <= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    top = max(range(len(hull)), key=lambda m: (hull[m][1], -m))
    hull = hull[:top + 1]
    last_k = pts[-1][0]
    if hull[-1][0] < last_k:
        hull.append((last_k, hull[-1][1]))
    k, v = map(np.array, zip(*hull))
    return ConcaveMajorant(k, v)


def rademacher_majorant(n, c=UNCONSTRAINED, reps=200, seed=0, ks=None, inflate=3.0):
    """Concave majorant psi with E sup_{k} <= psi(k) for all k <= n, w.h.p.

    MC upper bands ``mean + inflate*stderr`` are taken on a grid ``ks`` (all
    k <= n by default for n <= 256, else a half-octave grid). Because the
    expected supremum is non-decreasing in k, the band at grid point k_m also
    covers every k in (k_{m-1}, k_m]; both ends enter the majorant.
    """
    if ks is None:
        if n <= 256:
            ks = range(1, n + 1)
        else:
            ks = np.unique(np.concatenate((np.round(np.sqrt(2.0) ** np.arange(0, 2 * math.log2(n) + 1)), [n])))
    ks = sorted({int(k) for k in ks if 1 <= k <= n} | {n})
    points = []
    prev = 0
    bands = []
    for k in ks:
        mean, se = rademacher_sup_mc(k, c, reps, seed)
        upper = mean + inflate * (se if math.isfinite(se) else 0.0)
        bands.append((k, mean, se, upper))
        points.append((prev + 1, upper))
        points.append((k, upper))
        prev = k
    return least_concave_majorant(points), bands


def multiplier_bound(psi, law, n):
    """4 int_0^inf psi(n P(|xi| > t)) dt for i.i.d. multipliers.

    ``psi`` is a ConcaveMajorant (integrated piecewise in closed form up to
    one-dimensional tail integrals) or any callable (direct quadrature).
    Returns ``inf`` when the integral diverges.
    """
    if not isinstance(psi, ConcaveMajorant):
        # split where n G(t) crosses powers of two so each piece is smooth enough
        cuts = [0.0]
        k = 1
        while k < n:
            cuts.append(float(law.upper_quantile(k / n)))
            k *= 2
        cuts = sorted(set(cuts)) + [math.inf]
        total = 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            for lo, hi in zip(cuts[:-1], cuts[1:]):
                total += integrate.quad(lambda t: psi(n * law.tail_prob(t)), lo, hi,
                                        epsabs=1e-13, epsrel=1e-12, limit=500)[0]
        return 4.0 * total
    ks, vs = psi.k, psi.value
    if np.all(vs == 0):
        return 0.0
    # u = n G(t) falls from n (t = 0) to 0; segment m spans u in [k_m, k_{m+1}]
    total = 0.0
    inner = ks[(ks > 0) & (ks < n)]
    # t at which u crosses each knot, decreasing in the knot
    cut_u = np.concatenate(([float(n)], inner[::-1], [0.0]))
    cut_t = [0.0] + [float(law.upper_quantile(u / n)) for u in inner[::-1]] + [math.inf]
    for (u_hi, u_lo, t_lo, t_hi) in zip(cut_u[:-1], cut_u[1:], cut_t[:-1], cut_t[1:]):
        u_mid = 0.5 * (u_hi + u_lo)
        m = min(np.searchsorted(ks, u_mid) - 1, len(ks) - 2)
        m = max(m, 0)
        slope = (vs[m + 1] - vs[m]) / (ks[m + 1] - ks[m]) if u_mid < ks[-1] else 0.0
        base = (vs[m] - slope * ks[m]) if u_mid < ks[-1] else vs[-1]
        if math.isinf(t_hi):
            if base != 0.0:
                return math.inf
            if slope == 0.0:
                continue
            tail, _ = law.tail_power_integral(1.0, t_lo)
            if math.isinf(tail):
                return math.inf
            total += slope * n * tail
            continue
        piece = base * (t_hi - t_lo)
        if slope != 0.0:
            piece += slope * n * law.tail_power_integral(1.0, t_lo, t_hi)[0]
        total += piece
    return 4.0 * total


def corollary_bound(kappa, gamma, law, n):
    """Closed form of the multiplier bound for psi(k) = kappa k^(1/gamma).

    Valid for 1 <= gamma <= tail index: 4 kappa n^(1/gamma) ||xi||_{gamma,1}.
    """
    from .noise_models import lp1_norm

    if gamma < 1:
        raise ValueError("gamma must be >= 1 for a concave psi")
    return 4.0 * kappa * n ** (1.0 / gamma) * lp1_norm(law, gamma).value


# -- diagnostics ----------------------------------------------------------

@dataclass(frozen=True)
class OrderStatCheck:
    lhs: float
    lhs_stderr: float
    rhs: float
    rhs_stderr: float

    @property
    def satisfied(self):
        return self.lhs <= self.rhs + 3.0 * math.hypot(self.lhs_stderr, self.rhs_stderr)


def check_order_statistics_bound(law, n, c=UNCONSTRAINED, reps=2000, seed=0, inner_reps=None):
    """Compare E sup|sum xi_i f(X_i)| with the reversed-order-statistics bound.

    The right side is E sum_k (|eta_(k)| - |eta_(k+1)|) R(k), eta = 2|xi|,
    with R(k) = E sup|sum_{i<=k} eps_i f(X_i)| tabulated by MC for k <= n.
    """
    if n > 64:
        raise ValueError("order-statistics check is tabulated for n <= 64")
    inner_reps = reps if inner_reps is None else inner_reps
    R = np.empty(n)
    R_se = np.empty(n)
    for k in range(1, n + 1):
        R[k - 1], R_se[k - 1] = rademacher_sup_mc(k, c, inner_reps, seed + 1)
    R_se = np.where(np.isfinite(R_se), R_se, 0.0)
    lhs, lhs_se = multiplier_sup_mc(law, n, c, reps, seed)
    weights = np.empty((reps, n))
    for r in range(reps):
        eta = np.sort(2.0 * np.abs(law.draw(make_rng(seed + 2, n, r), n)))[::-1]
        weights[r] = eta - np.append(eta[1:], 0.0)
    rhs_draws = weights @ R
    rhs, rhs_se = mean_stderr(rhs_draws)
    rhs_se = math.hypot(rhs_se if math.isfinite(rhs_se) else 0.0,
                        float(np.sqrt(np.sum((weights.mean(0) * R_se) ** 2))))
    return OrderStatCheck(lhs, lhs_se if math.isfinite(lhs_se) else 0.0, rhs, rhs_se)


def pz_lower_bound(mean, q_moment, q, eps):
    """Paley-Zygmund: P(Z > eps EZ) >= ((1-eps) EZ / (E Z^q)^{1/q})^{q'}."""
    if mean < 0:
        raise ValueError("mean of a non-negative variable must be >= 0")
    if not q > 1:
        raise ValueError("q must exceed 1")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if q_moment < mean ** q * (1 - 1e-12):
        raise ValueError("E Z^q < (E Z)^q violates Jensen's inequality")
    if mean == 0:
        return 0.0
    qc = q / (q - 1.0)
    val = ((1.0 - eps) * mean / q_moment ** (1.0 / q)) ** qc
    return min(1.0, max(0.0, val))


def write_mc_csv(path, rows):
    """rows: iterables of (n, mean, stderr, reps, seed, constraint_min, constraint_max)."""
    with open(path, "w", newline="\n") as fh:
        fh.write("n,mean,stderr,reps,seed,constraint_min,constraint_max\n")
        for n, mean, se, reps, seed, cmin, cmax in rows:
            fh.write(f"{int(n)},{mean:.17g},{se:.17g},{int(reps)},{int(seed)},"
                     f"{cmin:.17g},{cmax:.17g}\n")
