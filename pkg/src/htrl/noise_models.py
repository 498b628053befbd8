"""Symmetric error laws with exact tails, samplers and L_{p,1} norms.

Every law is symmetric about zero and is described by the survival function
of its absolute value, ``G(t) = P(|xi| > t)``. The L_{p,1} norm

    ||xi||_{p,1} = int_0^inf G(t)^{1/p} dt

is computed by adaptive Simpson on a bounded range plus a closed-form
series for the power-law tail, so divergence is decided from exponents and
never from a quadrature blow-up.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .quadrature import adaptive_simpson
from .rng import make_rng

QUAD_TOL = 1e-10
_SERIES_TERMS = 60


@dataclass(frozen=True)
class Lp1Value:
    p: float
    value: float
    quadrature_error: float = 0.0

    @property
    def is_finite(self):
        return math.isfinite(self.value)


class ErrorLaw:
    """Base class; subclasses are frozen dataclasses."""

    kind = "abstract"
    # subclasses expose ``tail_index``: sup of r with E|xi|^r < inf

    def tail_prob(self, t):
        """P(|xi| > t) for scalar or array ``t >= 0``."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("tail_prob requires t >= 0")
        out = self._tail(t)
        return float(out) if out.ndim == 0 else out

    def upper_quantile(self, s):
        """Smallest t with P(|xi| > t) <= s, for 0 < s <= 1."""
        raise NotImplementedError

    def draw(self, rng, n):
        raise NotImplementedError

    def sample(self, seed, n):
        return self.draw(make_rng(seed, 0), n)

    def abs_moment(self, r):
        """E|xi|^r, ``inf`` when r is at or above the tail index."""
        raise NotImplementedError

    def to_config(self):
        raise NotImplementedError

    # -- integrals of G^r -------------------------------------------------

    def _series_start(self, r):
        """Point beyond which ``_tail_series`` is accurate."""
        raise NotImplementedError

    def _tail_series(self, r, t0):
        """Closed-form int_{t0}^inf G(t)^r dt, returns (value, error)."""
        raise NotImplementedError

    def tail_power_integral(self, r, lo=0.0, hi=math.inf, tol=QUAD_TOL):
        """int_lo^hi P(|xi|>t)^r dt with an error estimate.

        Returns ``(inf, 0)`` when the tail exponent makes the integral
        diverge and ``hi`` is infinite.
        """
        if r <= 0:
            raise ValueError("exponent r must be positive")
        if hi <= lo:
            return 0.0, 0.0
        if r * self.tail_index <= 1.0:
            if math.isinf(hi):
                return math.inf, 0.0
            # the tail series needs a decaying integrand; stay with quadrature
            return adaptive_simpson(lambda t: self._tail(np.float64(t)) ** r, lo, hi, tol)

        def g(t):
            return self._tail(np.float64(t)) ** r

        cut = self._series_start(r)
        if hi <= cut:
            return adaptive_simpson(g, lo, hi, tol)
        mid = max(lo, cut)
        val, err = adaptive_simpson(g, lo, mid, tol) if mid > lo else (0.0, 0.0)
        tail, terr = self._tail_series(r, mid)
        if not math.isinf(hi):
            rest, rerr = self._tail_series(r, hi)
            tail -= rest
            terr += rerr
        return val + tail, err + terr


def _pochhammer_ratio_series(r, m):
    """Coefficients of (1 + u)^(-r) = sum_k b_k u^k for k < m."""
    b = np.empty(m)
    b[0] = 1.0
    for k in range(1, m):
        b[k] = b[k - 1] * (-(r + k - 1)) / k
    return b


@dataclass(frozen=True)
class ParetoSymmetric(ErrorLaw):
    """Symmetric law with P(|xi| > t) = 1 / (1 + t^q)."""

    tail_index: float

    kind = "pareto"

    def __post_init__(self):
        if not self.tail_index > 0:
            raise ValueError("tail_index must be positive")

    def _tail(self, t):
        return 1.0 / (1.0 + t ** self.tail_index)

    def upper_quantile(self, s):
        s = np.asarray(s, dtype=float)
        return (1.0 / s - 1.0) ** (1.0 / self.tail_index)

    def draw(self, rng, n):
        u = 1.0 - rng.random(n)  # (0, 1]
        sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        return sign * (1.0 / u - 1.0) ** (1.0 / self.tail_index)

    def cdf_abs(self, t):
        return 1.0 - self._tail(np.asarray(t, dtype=float))

    def abs_moment(self, r):
        q = self.tail_index
        if r == 0:
            return 1.0
        if r >= q:
            return math.inf
        # int_0^inf r t^{r-1} / (1 + t^q) dt
        return (math.pi * r / q) / math.sin(math.pi * r / q)

    def to_config(self):
        return {"kind": "pareto", "tail_index": self.tail_index}

    def _series_start(self, r):
        return 10.0 ** (1.0 / self.tail_index)

    def _tail_series(self, r, t0):
        # (1 + t^q)^{-r} = t^{-qr} sum_k b_k t^{-qk}
        q = self.tail_index
        b = _pochhammer_ratio_series(r, _SERIES_TERMS)
        k = np.arange(_SERIES_TERMS)
        expo = q * (r + k) - 1.0
        terms = b * t0 ** (-expo) / expo
        return float(terms[:-1].sum()), float(abs(terms[-1]))


@dataclass(frozen=True)
class StudentT(ErrorLaw):
    dof: float

    kind = "student_t"

    def __post_init__(self):
        if not self.dof > 0:
            raise ValueError("dof must be positive")

    @property
    def tail_index(self):
        return self.dof

    def _tail(self, t):
        return 2.0 * special.stdtr(self.dof, -t)

    def upper_quantile(self, s):
        s = np.asarray(s, dtype=float)
        return -special.stdtrit(self.dof, 0.5 * s)

    def draw(self, rng, n):
        return rng.standard_t(self.dof, n)

    def cdf_abs(self, t):
        return 1.0 - self._tail(np.asarray(t, dtype=float))

    def abs_moment(self, r):
        v = self.dof
        if r >= v:
            return math.inf
        lg = (special.gammaln((r + 1) / 2) + special.gammaln((v - r) / 2)
              - special.gammaln(v / 2))
        return v ** (r / 2) * math.exp(lg) / math.sqrt(math.pi)

    def to_config(self):
        return {"kind": "student_t", "dof": self.dof}

    def _series_start(self, r):
        return max(2.0, 3.0 * math.sqrt(self.dof))

    def _tail_series(self, r, t0):
        # G(t) = I_x(a, 1/2), x = v/(v+t^2), a = v/2. In z = 1/t^2,
        # G = K z^a H(z) with H analytic near 0 and H(0) = 1.
        v = self.dof
        a = 0.5 * v
        m = _SERIES_TERMS
        K = v ** a / (a * special.beta(a, 0.5))
        # x(z) = v z / (1 + v z)
        xs = np.zeros(m)
        kk = np.arange(1, m)
        xs[1:] = (-1.0) ** (kk - 1) * v ** kk
        # c_n = a/(a+n) * (1/2)_n / n!
        c = np.empty(m)
        poch = 1.0
        for n in range(m):
            c[n] = a / (a + n) * poch
            poch *= (0.5 + n) / (n + 1)
        series = np.zeros(m)
        series[0] = c[-1]
        for n in range(m - 2, -1, -1):
            series = _series_mul(series, xs, m)
            series[0] += c[n]
        pref = _pochhammer_ratio_series(a, m) * v ** np.arange(m)
        H = _series_mul(pref, series, m)
        P = _series_pow(H, r, m)
        k = np.arange(m)
        expo = v * r + 2.0 * k - 1.0
        terms = K ** r * P * t0 ** (-expo) / expo
        return float(terms[:-1].sum()), float(abs(terms[-1]))


def _series_mul(a, b, m):
    return np.convolve(a, b)[:m]


def _series_pow(h, r, m):
    """h(z)^r for a power series with h[0] == 1 (J.C.P. Miller recurrence)."""
    p = np.zeros(m)
    p[0] = 1.0
    for k in range(1, m):
        j = np.arange(1, k + 1)
        p[k] = np.sum(((r + 1.0) * j - k) * h[j] * p[k - j]) / k
    return p


@dataclass(frozen=True)
class Gaussian(ErrorLaw):
    sigma: float = 1.0

    kind = "gaussian"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def tail_index(self):
        return math.inf

    def _tail(self, t):
        return special.erfc(t / (self.sigma * math.sqrt(2.0)))

    def upper_quantile(self, s):
        s = np.asarray(s, dtype=float)
        return self.sigma * math.sqrt(2.0) * special.erfcinv(s)

    def draw(self, rng, n):
        return self.sigma * rng.standard_normal(n)

    def cdf_abs(self, t):
        return 1.0 - self._tail(np.asarray(t, dtype=float))

    def abs_moment(self, r):
        return (self.sigma ** r * 2.0 ** (r / 2) * math.exp(special.gammaln((r + 1) / 2))
                / math.sqrt(math.pi))

    def to_config(self):
        return {"kind": "gaussian", "sigma": self.sigma}

    def _series_start(self, r):
        # erfc(x) <= exp(-x^2): beyond here G^r < exp(-40)
        return self.sigma * math.sqrt(80.0 / r)

    def _tail_series(self, r, t0):
        # bound int_{t0}^inf exp(-r t^2 / 2 sigma^2) dt, reported as error only
        s = self.sigma / math.sqrt(r)
        bound = s * math.sqrt(math.pi / 2.0) * special.erfc(t0 / (s * math.sqrt(2.0)))
        return 0.0, float(bound)


@dataclass(frozen=True)
class ScaledMixture(ErrorLaw):
    """The law of ``scale * xi`` with ``xi`` drawn from ``base``."""

    base: ErrorLaw
    scale: float

    kind = "scaled"

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @property
    def tail_index(self):
        return self.base.tail_index

    def _tail(self, t):
        return self.base._tail(t / self.scale)

    def upper_quantile(self, s):
        return self.scale * self.base.upper_quantile(s)

    def draw(self, rng, n):
        return self.scale * self.base.draw(rng, n)

    def cdf_abs(self, t):
        return self.base.cdf_abs(np.asarray(t, dtype=float) / self.scale)

    def abs_moment(self, r):
        return self.scale ** r * self.base.abs_moment(r)

    def to_config(self):
        return {"kind": "scaled", "scale": self.scale, "base": self.base.to_config()}

    def tail_power_integral(self, r, lo=0.0, hi=math.inf, tol=QUAD_TOL):
        v, e = self.base.tail_power_integral(r, lo / self.scale, hi / self.scale,
                                             tol / self.scale)
        return self.scale * v, self.scale * e


def law_from_config(cfg):
    """Build a law from a tagged record such as ``{kind = "pareto", tail_index = 4.5}``."""
    cfg = dict(cfg)
    kind = cfg.pop("kind", None)
    try:
        if kind == "pareto":
            return ParetoSymmetric(float(cfg.pop("tail_index")))
        if kind == "student_t":
            return StudentT(float(cfg.pop("dof")))
        if kind == "gaussian":
            return Gaussian(float(cfg.pop("sigma", 1.0)))
        if kind == "scaled":
            return ScaledMixture(law_from_config(cfg.pop("base")), float(cfg.pop("scale")))
    except KeyError as exc:
        raise ValueError(f"noise law of kind {kind!r} is missing key {exc.args[0]!r}") from None
    raise ValueError(f"unknown noise kind {kind!r}")


# -- module level operations ----------------------------------------------

def tail_prob(law, t):
    return law.tail_prob(t)


def sample(law, seed, n):
    if n < 0:
        raise ValueError("n must be non-negative")
    return law.sample(seed, n)


def lp1_norm(law, p):
    """The L_{p,1} norm int_0^inf P(|xi| > t)^{1/p} dt."""
    if p < 1:
        raise ValueError(f"L_(p,1) norm needs p >= 1, got {p}")
    if p >= law.tail_index:
        return Lp1Value(p, math.inf, 0.0)
    value, err = law.tail_power_integral(1.0 / p)
    return Lp1Value(p, float(value), float(err))


def lp_norm(law, p):
    """Ordinary L_p norm (E|xi|^p)^{1/p}; infinite at or above the tail index."""
    if p < 1:
        raise ValueError(f"L_p norm needs p >= 1, got {p}")
    m = law.abs_moment(p)
    return math.inf if math.isinf(m) else m ** (1.0 / p)


def mean_stderr(values):
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return float(values.mean()), math.inf
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))


def expected_max_mc(law, n, reps, seed):
    """Monte Carlo estimate of E max_{i<=n} |xi_i| with its standard error."""
    if n < 1 or reps < 1:
        raise ValueError("n and reps must be >= 1")
    maxima = np.empty(reps)
    for r in range(reps):
        maxima[r] = np.abs(law.draw(make_rng(seed, n, r), n)).max()
    return mean_stderr(maxima)
