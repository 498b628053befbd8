"""Slope estimation through the origin with noise that depends on the design."""

from dataclasses import dataclass

import numpy as np

from ..noise_models import mean_stderr
from ..rng import make_rng
from .harness import RiskCurve, fit_rate_exponent


@dataclass(frozen=True)
class CounterexampleResult:
    curve: RiskCurve
    fit: object
    reference_slope: float = -0.5


def _design(rng, n, delta, design):
    if design == "uniform":
        return rng.random(n)
    # symmetric with P(|X| > x) = x^{-(2+delta)} for x >= 1
    u = 1.0 - rng.random(n)
    return np.where(rng.random(n) < 0.5, -1.0, 1.0) * u ** (-1.0 / (2.0 + delta))


def counterexample_dependent(n_grid, reps, seed, delta=0.1, model="dependent",
                             design="pareto", alpha0=1.0):
    """Decay of E|alpha_hat - alpha0| for the through-origin least squares slope.

    ``model="dependent"`` uses xi_i = eps_i X_i; ``"independent"`` uses
    standard Gaussian noise drawn independently of X.
    """
    if model not in ("dependent", "independent"):
        raise ValueError(f"unknown model {model!r}")
    if design not in ("pareto", "uniform"):
        raise ValueError(f"unknown design {design!r}")
    rows = []
    for n in n_grid:
        err = np.empty(reps)
        for r in range(reps):
            rng = make_rng(seed, n, r)
            x = _design(rng, n, delta, design)
            if model == "dependent":
                xi = np.where(rng.random(n) < 0.5, -1.0, 1.0) * x
            else:
                xi = rng.standard_normal(n)
            y = alpha0 * x + xi
            err[r] = abs(float(x @ y) / float(x @ x) - alpha0)
        mean, se = mean_stderr(err)
        rows.append((int(n), mean, se, reps, 0))
    curve = RiskCurve(tuple(rows))
    return CounterexampleResult(curve, fit_rate_exponent(curve))
