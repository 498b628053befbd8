from .fits import (fit_interval_lse, fit_isotonic, fit_linear_1d, fit_segmented_lad,
                   fit_segmented_lse, isotonic_levels)
from .lasso import (LassoFit, LassoProblem, dual_gap, estimate_compatibility, fit_lasso_cd,
                    gaussian_approx_bound, gaussian_approx_ratios, kkt_check, kkt_violation,
                    lasso_lambda_rule, load_lasso_csv)
from .piecewise import (FitResult, PiecewiseConstantFn, RegressionData, fit_from_json, l2_risk,
                        segments_to_fn)

__all__ = [
    "FitResult", "LassoFit", "LassoProblem", "PiecewiseConstantFn", "RegressionData",
    "dual_gap", "estimate_compatibility", "fit_from_json", "fit_interval_lse", "fit_isotonic",
    "fit_lasso_cd", "fit_linear_1d", "fit_segmented_lad", "fit_segmented_lse",
    "gaussian_approx_bound", "gaussian_approx_ratios", "isotonic_levels", "kkt_check",
    "kkt_violation", "l2_risk", "lasso_lambda_rule", "load_lasso_csv", "segments_to_fn",
]
