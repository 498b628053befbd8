import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import brute_lcm_values, brute_sup_interval, window_feasible
from scipy import stats

from htrl._kernels import sup_interval_kernel
from htrl.empirical_process import (UNCONSTRAINED, ConcaveMajorant, DesignSample,
                                    IntervalConstraint, check_order_statistics_bound,
                                    corollary_bound, least_concave_majorant, multiplier_bound,
                                    multiplier_sup_mc, pz_lower_bound, rademacher_majorant,
                                    rademacher_sup_mc, realize_interval, sup_interval_sum,
                                    write_mc_csv)
from htrl.noise_models import Gaussian, ParetoSymmetric, lp1_norm


class Ones:
    """Degenerate multiplier law: every weight equals one."""

    def draw(self, rng, n):
        return np.ones(n)


def random_instance(rng):
    n = int(rng.integers(1, 65))
    x = np.sort(np.round(rng.random(n), int(rng.integers(1, 4))))
    w = rng.normal(size=n) if rng.random() < 0.5 else rng.integers(-3, 4, n).astype(float)
    lo = float(rng.random() * 0.6)
    hi = lo + float(rng.random() * (1 - lo))
    return x, w, IntervalConstraint(lo, hi)


def test_constraint_validation():
    with pytest.raises(ValueError):
        IntervalConstraint(0.5, 0.4)
    with pytest.raises(ValueError):
        IntervalConstraint(-0.1, 0.4)
    with pytest.raises(ValueError):
        IntervalConstraint(0.0, 1.5)


def test_all_positive_weights():
    res = sup_interval_sum(DesignSample(np.array([0.1, 0.2, 0.3]), np.ones(3)))
    assert res.value == 3
    a, b = res.interval
    assert a <= 0.1 and b >= 0.3


def test_mixed_weights_singleton():
    res = sup_interval_sum(DesignSample(np.array([0.1, 0.2, 0.3]), np.array([1.0, -2.0, 3.0])))
    assert res.value == 3
    assert res.window == (2, 2)


def test_empty_sample_rejected():
    with pytest.raises(ValueError):
        sup_interval_sum(DesignSample(np.array([]), np.array([])))


def test_full_length_constraint():
    s = DesignSample(np.array([0.5]), np.array([2.0]))
    res = sup_interval_sum(s, IntervalConstraint(1.0, 1.0))
    assert res.value == 2.0
    assert res.interval == (0.0, 1.0)


def test_long_intervals_only():
    s = DesignSample(np.array([0.2, 0.5, 0.8]), np.array([1.0, -1.0, 1.0]))
    res = sup_interval_sum(s, IntervalConstraint(0.9, 0.95))
    assert res.value == 1.0
    a, b = res.interval
    assert b - a >= 0.9 - 1e-12


def test_matches_brute_force():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        x, w, c = random_instance(rng)
        S = np.concatenate(([0.0], np.cumsum(w)))
        val, i, j = sup_interval_kernel(x, S, c.min_len, c.max_len)
        ref = brute_sup_interval(x, S, c.min_len, c.max_len)
        assert val == ref[0]
        assert (i, j) == (ref[1], ref[2])


def test_realized_interval_is_admissible():
    rng = np.random.default_rng(5)
    for _ in range(500):
        x, w, c = random_instance(rng)
        res = sup_interval_sum(DesignSample(x, w), c)
        if res.interval is None:
            continue
        a, b = res.interval
        i, j = res.window
        assert 0 <= a <= b <= 1
        assert c.min_len - 1e-12 <= b - a <= c.max_len + 1e-12
        inside = (x >= a) & (x <= b)
        assert inside.sum() == j - i + 1 and inside[i:j + 1].all()
        assert abs(w[inside].sum()) == pytest.approx(res.value, abs=1e-9)


def test_random_real_intervals_never_exceed_sup():
    rng = np.random.default_rng(8)
    for _ in range(200):
        x, w, c = random_instance(rng)
        val = sup_interval_sum(DesignSample(x, w), c).value
        for _ in range(50):
            length = c.min_len + rng.random() * (c.max_len - c.min_len)
            a = rng.random() * (1 - length)
            inside = (x >= a) & (x <= a + length)
            assert abs(w[inside].sum()) <= val + 1e-9


def test_feasibility_oracle_corner_case():
    x = np.array([0.0, 1.0])
    assert window_feasible(x, 0, 1, 1.0, 1.0)
    assert not window_feasible(x, 0, 0, 1.0, 1.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1), st.floats(-5, 5)), min_size=1, max_size=40),
       st.floats(0.01, 100.0))
def test_scaling_equivariance(pts, lam):
    x, w = map(np.array, zip(*sorted(pts)))
    s1 = sup_interval_sum(DesignSample(x, w))
    s2 = sup_interval_sum(DesignSample(x, lam * w))
    assert s2.value == pytest.approx(lam * s1.value, rel=1e-9, abs=1e-12)


def test_scaling_keeps_window_for_exact_factor():
    rng = np.random.default_rng(1)
    x = np.sort(rng.random(50))
    w = rng.normal(size=50)
    assert sup_interval_sum(DesignSample(x, w)).window == \
        sup_interval_sum(DesignSample(x, 4.0 * w)).window


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1), st.floats(-5, 5)), min_size=1, max_size=30),
       st.floats(0, 0.5), st.floats(0, 0.5), st.floats(0.5, 1))
def test_nested_constraints_monotone(pts, lo1, lo2, hi):
    x, w = map(np.array, zip(*sorted(pts)))
    s = DesignSample(x, w)
    inner = IntervalConstraint(max(lo1, lo2), max(hi * 0.9, lo1, lo2))
    outer = IntervalConstraint(min(lo1, lo2), hi)
    assert sup_interval_sum(s, inner).value <= sup_interval_sum(s, outer).value


def test_realize_interval_extends_inside_gaps():
    x = np.array([0.2, 0.25, 0.9])
    a, b = realize_interval(x, 0, 1, 0.3)
    assert b - a == pytest.approx(0.3)
    assert a <= 0.2 and 0.25 <= b < 0.9


def test_rademacher_single_point():
    mean, _ = rademacher_sup_mc(1, UNCONSTRAINED, 50, 0)
    assert mean == 1.0


def test_rademacher_seed_stability():
    n = 256
    c = IntervalConstraint(0.0, n ** (-2 / 3))
    m1, s1 = rademacher_sup_mc(n, c, 400, 1)
    m2, s2 = rademacher_sup_mc(n, c, 400, 2)
    assert abs(m1 - m2) <= 3 * math.hypot(s1, s2)


def test_rademacher_growth_slope():
    ns = [2 ** k for k in range(6, 14)]
    means = [rademacher_sup_mc(n, UNCONSTRAINED, 200, 3)[0] for n in ns]
    slope = stats.linregress(np.log(ns), np.log(means)).slope
    assert 0.40 <= slope <= 0.60


def test_multiplier_constant_weights():
    mean, _ = multiplier_sup_mc(Ones(), 5, UNCONSTRAINED, 10, 0)
    assert mean == 5.0


def test_multiplier_gaussian_growth_slope():
    ns = [2 ** k for k in range(7, 15)]
    means = [multiplier_sup_mc(Gaussian(1.0), n, UNCONSTRAINED, 200, 4)[0] for n in ns]
    slope = stats.linregress(np.log(ns), np.log(means)).slope
    assert 0.40 <= slope <= 0.60


def test_mc_determinism():
    a = multiplier_sup_mc(ParetoSymmetric(3.0), 300, UNCONSTRAINED, 30, 9)
    b = multiplier_sup_mc(ParetoSymmetric(3.0), 300, UNCONSTRAINED, 30, 9)
    assert a == b


# -- concave majorants ----------------------------------------------------

def test_lcm_interpolates_concave_points():
    pts = [(k, math.sqrt(k)) for k in range(0, 11)]
    psi = least_concave_majorant(pts)
    assert np.allclose(psi(np.arange(11)), np.sqrt(np.arange(11)))


def test_lcm_small_example():
    psi = least_concave_majorant([(0, 0), (1, 1), (2, 0.5)])
    ref = brute_lcm_values([(0, 0), (1, 1), (2, 0.5)], [0, 1, 2])
    assert np.allclose(psi([0, 1, 2]), ref)
    assert psi(2) == 1.0


def test_lcm_rejects_negative():
    with pytest.raises(ValueError):
        least_concave_majorant([(1, -1.0)])


def test_lcm_against_chord_oracle():
    rng = np.random.default_rng(3)
    for _ in range(200):
        m = int(rng.integers(1, 10))
        ks = np.sort(rng.choice(np.arange(1, 30), m, replace=False))
        pts = list(zip(ks.tolist(), (rng.random(m) * 5).tolist()))
        psi = least_concave_majorant(pts)
        grid = np.arange(0, 31)
        assert np.allclose(psi(grid), brute_lcm_values(pts, grid), atol=1e-12)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 100), st.floats(0, 50)), min_size=1, max_size=15))
def test_lcm_properties(pts):
    psi = least_concave_majorant(pts)
    for k, v in pts:
        assert psi(k) >= v - 1e-9
    slopes = psi.slopes
    assert np.all(slopes >= -1e-12)
    assert np.all(np.diff(slopes) <= 1e-9)
    assert psi(0) == 0.0
    again = least_concave_majorant(psi.knots())
    assert np.allclose(again.k, psi.k) and np.allclose(again.value, psi.value)


# -- multiplier bound -----------------------------------------------------

def test_bound_zero_majorant():
    psi = ConcaveMajorant(np.array([0.0, 10.0]), np.array([0.0, 0.0]))
    assert multiplier_bound(psi, ParetoSymmetric(3.0), 10) == 0.0


def test_bound_power_majorant_matches_lp1():
    law = ParetoSymmetric(4.0)
    direct = multiplier_bound(lambda k: np.sqrt(k), law, 64)
    assert direct == pytest.approx(4 * math.sqrt(64) * lp1_norm(law, 2).value, rel=1e-6)
    assert corollary_bound(1.0, 2.0, law, 64) == pytest.approx(direct, rel=1e-6)


@pytest.mark.parametrize("law", [ParetoSymmetric(3.0), Gaussian(1.0), ParetoSymmetric(1.5)],
                         ids=repr)
def test_piecewise_bound_matches_quadrature(law):
    pts = [(k, 1.3 * k ** 0.45 + 0.1 * math.log1p(k)) for k in range(1, 65)]
    psi = least_concave_majorant(pts)
    exact = multiplier_bound(psi, law, 64)
    quad = multiplier_bound(lambda t: psi(t), law, 64)
    assert exact == pytest.approx(quad, rel=1e-5)


def test_bound_divergent_for_tail_index_one():
    psi = least_concave_majorant([(k, math.sqrt(k)) for k in range(65)])
    assert math.isinf(multiplier_bound(psi, ParetoSymmetric(1.0), 64))


def test_majorant_bound_dominates_mc():
    psi, bands = rademacher_majorant(64, reps=200, seed=1)
    for k, mean, se, upper in bands:
        assert psi(k) >= upper - 1e-9
    for law in [ParetoSymmetric(3.0), Gaussian(1.0)]:
        for n in (16, 64):
            mean, se = multiplier_sup_mc(law, n, UNCONSTRAINED, 200, 2)
            assert mean <= multiplier_bound(psi, law, n) + 3 * se


# -- diagnostics ----------------------------------------------------------

def test_order_statistics_constant_multipliers():
    chk = check_order_statistics_bound(Ones(), 16, UNCONSTRAINED, reps=200, seed=0)
    assert chk.lhs == 16.0
    # all order statistics equal: rhs collapses to 2 E sup over n signs
    assert chk.rhs == pytest.approx(2 * rademacher_sup_mc(16, UNCONSTRAINED, 200, 1)[0])
    # constant weights are not mean-zero and indicators are not centred, so the
    # inequality itself is not expected here
    assert chk.lhs > chk.rhs


def test_order_statistics_pareto():
    chk = check_order_statistics_bound(ParetoSymmetric(3.0), 32, UNCONSTRAINED, reps=2000,
                                       seed=4)
    assert chk.satisfied


def test_order_statistics_single_point():
    law = ParetoSymmetric(3.0)
    chk = check_order_statistics_bound(law, 1, UNCONSTRAINED, reps=4000, seed=6)
    m = law.abs_moment(1.0)
    assert abs(chk.lhs - m) <= 3 * chk.lhs_stderr
    assert abs(chk.rhs - 2 * m) <= 3 * chk.rhs_stderr


def test_pz_values():
    assert pz_lower_bound(1.0, 1.0, 2.0, 0.5) == pytest.approx(0.25)
    assert pz_lower_bound(1.0, 2.0, 2.0, 0.5) == pytest.approx(1 / 8)
    assert pz_lower_bound(1.0, 2.0, 2.0, 1 - 1e-9) < 1e-12


def test_pz_jensen_violation():
    with pytest.raises(ValueError):
        pz_lower_bound(2.0, 1.0, 2.0, 0.5)


def test_mc_csv_format(tmp_path):
    path = tmp_path / "mc.csv"
    write_mc_csv(path, [(64, 1 / 3, 0.01, 200, 7, 0.0, 0.25)])
    text = path.read_bytes().decode()
    assert text.splitlines()[0] == "n,mean,stderr,reps,seed,constraint_min,constraint_max"
    assert "0.33333333333333331" in text
    assert "\r" not in text
