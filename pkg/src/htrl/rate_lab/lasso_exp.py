"""Lasso prediction-error curves under the tuning rule."""

import math
from dataclasses import dataclass

import numpy as np

from ..estimators import estimate_compatibility
from ..noise_models import lp1_norm
from ..rng import make_rng
from .harness import ExperimentSpec, LassoSetup, fit_rate_exponent, run_risk_curve


@dataclass(frozen=True)
class LassoExperimentResult:
    curve: object
    fit: object
    # rows of (n, error / (s log d / n), compatibility estimate, error / oracle bound)
    ratios: tuple

    def ratio_spread(self):
        r = [row[1] for row in self.ratios]
        return max(r) / min(r)


def lasso_experiment(d, s, n_grid, design_law, noise_law, L=1.0, alpha=0.5, reps=100, seed=0,
                     threads=None, compat_budget=64):
    setup = LassoSetup(d, s, design_law, L, alpha)
    spec = ExperimentSpec("lasso", noise_law, tuple(n_grid), reps, seed, lasso=setup)
    curve = run_risk_curve(spec, threads)
    fit = fit_rate_exponent(curve)
    norm = lp1_norm(noise_law, 1.0 / alpha).value
    ratios = []
    for n, mean, *_ in curve.rows:
        scale = s * math.log(d) / n
        # compatibility of one design draw per n, from a dedicated stream
        X = design_law.draw(make_rng(seed, n, reps, 1), n * d).reshape(n, d)
        phi = estimate_compatibility(X, range(s), L, compat_budget, seed)
        bound = 16.0 * L * L * norm * norm / (phi * phi) * scale
        ratios.append((int(n), float(mean / scale), float(phi), float(mean / bound)))
    return LassoExperimentResult(curve, fit, tuple(ratios))
