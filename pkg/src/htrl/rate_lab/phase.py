"""Phase-diagram cells over (alpha, p) mapped onto implemented classes."""

import math
from dataclasses import dataclass, replace

from ..estimators import PiecewiseConstantFn
from ..noise_models import Gaussian, ParetoSymmetric
from .exponents import regime, theoretical_exponent
from .harness import fit_rate_exponent, run_risk_curve

ISOTONIC_ALPHA = 1.0
INTERVAL_ALPHA_MAX = 0.1  # alphas at or below this act as the VC-class limit


@dataclass(frozen=True)
class PhaseCell:
    alpha: float
    p: float
    estimator: str | None
    regime: str
    e_theory: float
    two_sided: bool
    reason: str = ""
    e_measured: float = math.nan
    e_stderr: float = math.nan
    passed: bool | None = None

    def to_dict(self):
        return {"alpha": self.alpha, "p": _num(self.p), "estimator": self.estimator,
                "regime": self.regime, "e_theory": self.e_theory,
                "two_sided": self.two_sided, "reason": self.reason,
                "e_measured": _num(self.e_measured), "e_stderr": _num(self.e_stderr),
                "pass": self.passed}


def _num(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def noise_for(p, margin=0.1):
    """Gaussian for p = inf, else Pareto with tail index p + margin."""
    return Gaussian(1.0) if math.isinf(p) else ParetoSymmetric(p + margin)


def plan_cell(alpha, p):
    """Class, regime and sidedness of one cell, without simulating."""
    reg = regime(alpha, p)
    e = theoretical_exponent(alpha, p)
    if abs(alpha - ISOTONIC_ALPHA) < 1e-12:
        # the Gaussian rate is known to be optimal; with finite p only the
        # upper bound is available and the isotonic fit can do better
        return PhaseCell(alpha, p, "isotonic", reg, e, two_sided=math.isinf(p))
    if alpha <= INTERVAL_ALPHA_MAX:
        # the hard-class lower bound matches the noise branch
        return PhaseCell(alpha, p, "interval_lse", reg, e, two_sided=reg == "noise")
    return PhaseCell(alpha, p, None, reg, e, two_sided=False,
                     reason=f"no implemented class with entropy exponent {alpha}")


def plan_phase_diagram(alphas, ps):
    return [plan_cell(a, p) for a in alphas for p in ps]


def phase_diagram(alphas, ps, template, tolerance=0.10, min_n=128, margin=0.1, threads=None):
    """Run every mapped cell and compare measured with theoretical exponents.

    ``template`` supplies n_grid, reps, seed, truth and level_bound; the
    estimator, noise and min_len rule are set per cell.
    """
    out = []
    for cell in plan_phase_diagram(alphas, ps):
        if cell.estimator is None:
            out.append(cell)
            continue
        spec = replace(template, estimator=cell.estimator, noise=noise_for(cell.p, margin),
                       min_len="delta_sq", rule_alpha=cell.alpha, rule_p=cell.p)
        if cell.estimator == "interval_lse":
            spec = replace(spec, truth=PiecewiseConstantFn.constant(0.0, template.level_bound))
        fit = fit_rate_exponent(run_risk_curve(spec, threads), min_n=min_n)
        e = fit.exponent
        if cell.two_sided:
            ok = abs(e - cell.e_theory) <= tolerance
        else:
            ok = e >= cell.e_theory - tolerance
        out.append(replace(cell, e_measured=e, e_stderr=fit.slope_stderr, passed=bool(ok)))
    return out

