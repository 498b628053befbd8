"""Rate exponents e(alpha, p) with risk of order n^{-e}."""


def _check(alpha, p):
    if not 0 < alpha < 2:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha}")
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")


def entropy_exponent(alpha):
    return 1.0 / (2.0 + alpha)


def noise_exponent(p):
    return 0.5 - 0.5 / p


def critical_p(alpha):
    """Moment level where the two branches meet."""
    return 1.0 + 2.0 / alpha


def theoretical_exponent(alpha, p):
    """min{1/(2+alpha), 1/2 - 1/(2p)}; p may be ``math.inf``."""
    _check(alpha, p)
    return min(entropy_exponent(alpha), noise_exponent(p))


def regime(alpha, p):
    """'noise' below the critical curve, 'entropy' on or above it."""
    _check(alpha, p)
    return "noise" if p < critical_p(alpha) else "entropy"


def lse_min_len(n, alpha, p):
    """delta_n^2 with delta_n = n^{-e(alpha, p)}."""
    return float(n) ** (-2.0 * theoretical_exponent(alpha, p))
