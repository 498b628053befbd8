"""Monte Carlo risk curves and log-log rate fits."""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ..estimators import (LassoProblem, PiecewiseConstantFn, RegressionData, fit_interval_lse,
                          fit_isotonic, fit_lasso_cd, fit_linear_1d, fit_segmented_lad,
                          fit_segmented_lse, l2_risk, lasso_lambda_rule)
from ..noise_models import ErrorLaw, mean_stderr
from ..rng import make_rng
from .exponents import lse_min_len

ESTIMATORS = ("interval_lse", "segmented_lse", "isotonic", "lad_segmented", "linear_1d", "lasso")


@dataclass(frozen=True)
class LassoSetup:
    d: int
    s: int
    design_law: ErrorLaw
    L: float = 1.0
    alpha: float = 0.5
    tol: float = 1e-8
    max_iter: int = 10_000

    def theta0(self):
        theta = np.zeros(self.d)
        theta[:self.s] = [1.0 if j % 2 == 0 else -1.0 for j in range(self.s)]
        return theta


@dataclass(frozen=True)
class ExperimentSpec:
    """One risk-curve experiment.

    ``min_len`` for interval_lse is a number or ``"delta_sq"``, meaning
    n^{-2 e(alpha, p)} with ``rule_alpha`` and ``rule_p``. ``k`` is the
    segment budget for the segmented classes. For linear_1d the truth is
    the slope ``alpha0`` and the risk is |alpha_hat - alpha0|.
    """

    estimator: str
    noise: ErrorLaw
    n_grid: tuple
    reps: int
    master_seed: int = 0
    truth: PiecewiseConstantFn = field(default_factory=PiecewiseConstantFn.constant)
    level_bound: float = 1.0
    k: int = 1
    min_len: object = 0.0
    rule_alpha: float = 1e-9
    rule_p: float = 2.0
    alpha0: float = 1.0
    lasso: LassoSetup | None = None

    def __post_init__(self):
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"unknown estimator {self.estimator!r}; choose from {ESTIMATORS}")
        grid = tuple(int(n) for n in self.n_grid)
        if len(grid) < 4 or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
            raise ValueError("n_grid must be strictly increasing with at least 4 entries")
        object.__setattr__(self, "n_grid", grid)
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.estimator == "lasso" and self.lasso is None:
            raise ValueError("lasso estimator needs a LassoSetup")

    def min_len_at(self, n):
        if self.min_len == "delta_sq":
            return lse_min_len(n, self.rule_alpha, self.rule_p)
        return float(self.min_len)


@dataclass(frozen=True)
class RiskCurve:
    """Rows of (n, mean_risk, stderr, reps_used, excluded)."""

    rows: tuple

    @property
    def n(self):
        return np.array([r[0] for r in self.rows], dtype=float)

    @property
    def mean(self):
        return np.array([r[1] for r in self.rows])

    @property
    def stderr(self):
        return np.array([r[2] for r in self.rows])

    def to_csv(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write("n,mean_risk,stderr,reps,excluded\n")
            for n, m, se, reps, exc in self.rows:
                fh.write(f"{int(n)},{m:.17g},{se:.17g},{int(reps)},{int(exc)}\n")


@dataclass(frozen=True)
class RateFit:
    slope: float
    slope_stderr: float
    intercept: float
    r2: float
    n_used: tuple
    floored: bool = False

    @property
    def exponent(self):
        """Measured e with risk of order n^{-e}."""
        return -self.slope

    def to_dict(self):
        return {"slope": self.slope, "slope_stderr": self.slope_stderr,
                "intercept": self.intercept, "r2": self.r2, "n_used": list(self.n_used),
                "floored": self.floored}


def _one_rep(spec, n, rep):
    """Returns the risk of one replication or None when the fit is flagged."""
    rng = make_rng(spec.master_seed, n, rep)
    if spec.estimator == "lasso":
        return _lasso_rep(spec, n, rng)
    x = rng.random(n)
    xi = spec.noise.draw(rng, n)
    if spec.estimator == "linear_1d":
        y = spec.alpha0 * x + xi
        return abs(fit_linear_1d(RegressionData(x, y)) - spec.alpha0)
    data = RegressionData(x, spec.truth(x) + xi, xi)
    est = spec.estimator
    if est == "interval_lse":
        fn = fit_interval_lse(data, spec.min_len_at(n), spec.level_bound).fn
    elif est == "segmented_lse":
        fn = fit_segmented_lse(data, min(spec.k, n), spec.level_bound).fn
    elif est == "lad_segmented":
        fn = fit_segmented_lad(data, min(spec.k, n), spec.level_bound).fn
    else:
        fn = fit_isotonic(data, spec.level_bound)
    return l2_risk(fn, spec.truth)


def _lasso_rep(spec, n, rng):
    setup = spec.lasso
    X = setup.design_law.draw(rng, n * setup.d).reshape(n, setup.d)
    theta0 = setup.theta0()
    signal = X @ theta0
    Y = signal + spec.noise.draw(rng, n)
    lam = lasso_lambda_rule(spec.noise, setup.alpha, setup.L, n, setup.d)
    fit = fit_lasso_cd(LassoProblem(X, Y, lam), setup.tol, setup.max_iter)
    if not fit.converged:
        return None
    resid = X @ fit.theta - signal
    return float(resid @ resid) / n


def resolve_threads(threads=None):
    if threads in (None, "auto"):
        env = os.environ.get("HTRL_THREADS")
        threads = int(env) if env else 1
    threads = int(threads)
    if threads < 1:
        raise ValueError("threads must be >= 1")
    return threads


def run_risk_curve(spec, threads=None):
    """Mean risk and standard error per n; independent of ``threads``.

    Every replication owns a generator keyed by (master_seed, n, rep) and
    writes into its own slot, so scheduling cannot change the output.
    """
    threads = resolve_threads(threads)
    rows = []
    for n in spec.n_grid:
        if threads == 1:
            risks = [_one_rep(spec, n, r) for r in range(spec.reps)]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                risks = list(pool.map(lambda r: _one_rep(spec, n, r), range(spec.reps)))
        kept = np.array([v for v in risks if v is not None], dtype=float)
        excluded = len(risks) - kept.size
        mean, se = mean_stderr(kept) if kept.size else (math.nan, math.nan)
        rows.append((n, mean, se, int(kept.size), excluded))
    return RiskCurve(tuple(rows))


def fit_rate_exponent(curve, burn_in=0, min_n=None, floor=None):
    """OLS of log(mean_risk) on log(n).

    Drops the first ``burn_in`` rows and, if given, rows with n < ``min_n``.
    Non-positive risks are an error unless ``floor`` is set, in which case
    they are raised to it and the fit is flagged.
    """
    rows = list(curve.rows)[burn_in:]
    if min_n is not None:
        rows = [r for r in rows if r[0] >= min_n]
    if len(rows) < 4:
        raise ValueError(f"need at least 4 rows to fit a rate, have {len(rows)}")
    n = np.array([r[0] for r in rows], dtype=float)
    risk = np.array([r[1] for r in rows], dtype=float)
    floored = False
    if np.any(~(risk > 0)):
        if floor is None:
            raise ValueError("mean risks must be positive for a log-log fit")
        risk = np.maximum(np.nan_to_num(risk, nan=floor), floor)
        floored = True
    ln, lr = np.log(n), np.log(risk)
    res = stats.linregress(ln, lr)
    if np.ptp(lr) == 0.0 or not math.isfinite(res.rvalue):
        r2 = 1.0  # a flat curve is fitted exactly
    else:
        r2 = min(max(res.rvalue ** 2, 0.0), 1.0)
    return RateFit(float(res.slope), float(res.stderr), float(res.intercept), float(r2),
                   tuple(int(v) for v in n), floored)
