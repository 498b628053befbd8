from .counterexample import CounterexampleResult, counterexample_dependent
from .exponents import (critical_p, entropy_exponent, lse_min_len, noise_exponent, regime,
                        theoretical_exponent)
from .harness import (ESTIMATORS, ExperimentSpec, LassoSetup, RateFit, RiskCurve,
                      fit_rate_exponent, resolve_threads, run_risk_curve)
from .lasso_exp import LassoExperimentResult, lasso_experiment
from .phase import PhaseCell, noise_for, phase_diagram, plan_cell, plan_phase_diagram
from .profiles import (ProfileRow, envelope_violations, fn_en_profile, interval_lse_risk,
                       profile_argmax)

__all__ = [
    "ESTIMATORS", "CounterexampleResult", "ExperimentSpec", "LassoExperimentResult",
    "LassoSetup", "PhaseCell", "ProfileRow", "RateFit", "RiskCurve", "counterexample_dependent",
    "critical_p", "entropy_exponent", "envelope_violations", "fit_rate_exponent",
    "fn_en_profile", "interval_lse_risk", "lasso_experiment", "lse_min_len", "noise_exponent",
    "noise_for", "phase_diagram", "plan_cell", "plan_phase_diagram", "profile_argmax", "regime",
    "resolve_threads", "run_risk_curve", "theoretical_exponent",
]
