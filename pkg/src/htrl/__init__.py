"""Least squares under heavy-tailed errors: multiplier empirical processes,
exact estimators on [0, 1], and Monte Carlo rate experiments."""

__version__ = "0.1.0"
