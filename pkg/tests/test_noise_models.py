import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from htrl.noise_models import (Gaussian, ParetoSymmetric, ScaledMixture, StudentT,
                               expected_max_mc, law_from_config, lp1_norm, lp_norm, sample,
                               tail_prob)

# Reference values from 30-digit mpmath quadrature of int_0^inf G(t)^{1/p} dt.
LP1_REFERENCE = [
    (ParetoSymmetric(4.0), 2, 1.8540746773013719),  # Gamma(1/4)^2 / (4 sqrt(pi))
    (ParetoSymmetric(4.5), 2, 1.6702097759118579),
    (ParetoSymmetric(3.0), 2, 2.8043642106509085),
    (Gaussian(1.0), 2, 1.3037853169509234),
    (StudentT(5.0), 2, 1.9378917881915341),
    (StudentT(5.0), 3, 3.5956956756636345),
]

LAWS = [ParetoSymmetric(2.0), ParetoSymmetric(4.5), StudentT(3.0), Gaussian(2.0),
        ScaledMixture(ParetoSymmetric(3.0), 0.5)]


def test_pareto_tail_values():
    law = ParetoSymmetric(2.0)
    assert tail_prob(law, 1.0) == 0.5
    assert tail_prob(law, 0.0) == 1.0
    assert tail_prob(Gaussian(1.0), 0.0) == 1.0


def test_negative_t_rejected():
    with pytest.raises(ValueError):
        tail_prob(Gaussian(1.0), -0.1)


@pytest.mark.parametrize("law", LAWS, ids=repr)
def test_tail_non_increasing(law):
    t = np.linspace(0, 50, 2001)
    g = law.tail_prob(t)
    assert np.all(np.diff(g) <= 0)
    assert 0 < g[0] <= 1


@pytest.mark.parametrize("law", LAWS, ids=repr)
def test_sampler_matches_cdf(law):
    x = sample(law, 3, 20_000)
    res = stats.kstest(np.abs(x), law.cdf_abs)
    assert res.pvalue > 1e-3
    # symmetry
    assert abs(np.mean(x > 0) - 0.5) < 4 * 0.5 / math.sqrt(x.size)


def test_sample_determinism():
    a = sample(StudentT(3.0), 11, 1000)
    b = sample(StudentT(3.0), 11, 1000)
    assert a.tobytes() == b.tobytes()
    assert sample(Gaussian(1.0), 0, 0).size == 0


def test_pareto_empirical_tail_at_two():
    law = ParetoSymmetric(4.5)
    x = sample(law, 1, 100_000)
    p = tail_prob(law, 2.0)
    emp = np.mean(np.abs(x) > 2.0)
    assert abs(emp - p) <= 3 * math.sqrt(p * (1 - p) / x.size)


def test_gaussian_sample_mean():
    x = sample(Gaussian(1.0), 7, 100_000)
    assert abs(x.mean()) <= 4 / math.sqrt(x.size)


@pytest.mark.parametrize("law,p,ref", LP1_REFERENCE, ids=lambda v: repr(v))
def test_lp1_against_reference(law, p, ref):
    v = lp1_norm(law, p)
    assert v.is_finite
    assert abs(v.value - ref) < 1e-9
    assert v.quadrature_error < 1e-8 * (1 + v.value)


def test_lp1_pareto_against_trapezoid():
    # independent check: substitute t = tan(u) and use a fine trapezoid rule
    u = np.linspace(0, math.pi / 2, 400_001)
    t = np.tan(u[:-1])
    f = np.append((1 + t ** 4) ** -0.5 / np.cos(u[:-1]) ** 2, 1.0)  # limit at pi/2 is 1
    ref = integrate.trapezoid(f, u)
    assert lp1_norm(ParetoSymmetric(4.0), 2).value == pytest.approx(ref, rel=1e-8)


def test_lp1_gaussian_finite_and_pareto_divergent():
    assert lp1_norm(Gaussian(1.0), 2).is_finite
    assert math.isinf(lp1_norm(ParetoSymmetric(2.0), 2).value)


def test_lp1_rejects_p_below_one():
    with pytest.raises(ValueError):
        lp1_norm(Gaussian(1.0), 0.5)


@pytest.mark.parametrize("q", [1.5, 2.0, 3.0, 4.5, 6.0])
@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, 4.5, 5.0])
def test_lp1_finiteness_iff_p_below_tail_index(q, p):
    assert lp1_norm(ParetoSymmetric(q), p).is_finite == (p < q)


@pytest.mark.parametrize("law", [ParetoSymmetric(3.0), StudentT(4.0), Gaussian(0.7),
                                 ScaledMixture(StudentT(6.0), 2.0)], ids=repr)
def test_lp1_matches_scipy_quad(law):
    p = 2.0
    ref, _ = integrate.quad(lambda t: law.tail_prob(t) ** (1 / p), 0, np.inf,
                            epsabs=1e-13, epsrel=1e-12, limit=500)
    assert lp1_norm(law, p).value == pytest.approx(ref, rel=1e-8)


def test_lp1_dominates_lp():
    for law in [ParetoSymmetric(4.0), StudentT(5.0), Gaussian(1.0)]:
        assert lp1_norm(law, 2).value >= lp_norm(law, 2) - 1e-12


def test_scaled_mixture_homogeneity():
    base = ParetoSymmetric(3.0)
    assert lp1_norm(ScaledMixture(base, 2.5), 2).value == pytest.approx(
        2.5 * lp1_norm(base, 2).value, rel=1e-10)


@pytest.mark.parametrize("law", [ParetoSymmetric(3.0), StudentT(5.0), Gaussian(1.3)], ids=repr)
def test_abs_moment_closed_form(law):
    ref, _ = integrate.quad(law.tail_prob, 0, np.inf, limit=500)
    assert law.abs_moment(1.0) == pytest.approx(ref, rel=1e-8)


def test_expected_max_pareto_bracket():
    n = 10_000
    est, se = expected_max_mc(ParetoSymmetric(2.0), n, 400, 5)
    assert 0.25 * math.sqrt(n) <= est <= 3 * math.sqrt(n)


@pytest.mark.parametrize("q,n", [(2.0, 2), (2.0, 64), (3.0, 100), (4.5, 1000)])
def test_expected_max_bracket_property(q, n):
    est, se = expected_max_mc(ParetoSymmetric(q), n, 400, 9)
    lo, hi = 0.25 * n ** (1 / q), 3 * n ** (1 / q)
    assert est + 3 * se >= lo and est - 3 * se <= hi


def test_expected_max_near_zero_noise():
    est, _ = expected_max_mc(Gaussian(1e-12), 10, 20, 0)
    assert est <= 1e-10


def test_expected_max_single_draw_is_mean_abs():
    law = ParetoSymmetric(3.0)
    est, se = expected_max_mc(law, 1, 4000, 2)
    ref, _ = integrate.quad(law.tail_prob, 0, np.inf, limit=500)
    assert abs(est - ref) <= 3 * se


def test_law_from_config_round_trip():
    for law in LAWS:
        assert law_from_config(law.to_config()) == law
    with pytest.raises(ValueError, match="tail_index"):
        law_from_config({"kind": "pareto"})
    with pytest.raises(ValueError, match="unknown"):
        law_from_config({"kind": "cauchy"})


@settings(max_examples=40, deadline=None)
@given(st.floats(1.05, 8.0), st.floats(0.0, 100.0), st.floats(0.0, 100.0))
def test_pareto_tail_closed_form(q, t1, t2):
    law = ParetoSymmetric(q)
    lo, hi = sorted((t1, t2))
    assert law.tail_prob(lo) >= law.tail_prob(hi)
    assert law.tail_prob(t1) == pytest.approx(1 / (1 + t1 ** q), rel=1e-14)
