import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.fastest_saturated import crit
from artifact.perturbation import hat_theta
from artifact.tent import (
    base_projections,
    final_value,
    k_tent,
    point_base_ell0_factor,
    point_base_excess,
    saturated_final_factor,
    tent_admissible,
    tent_final_lower_bound,
    tent_reach_bound,
    tent_solve,
    worst_case_ratio,
)

K = crit()
TH = hat_theta()
reals = st.floats(min_value=-10, max_value=10)


def _vec(g):
    return np.array([g.ell_hat_0, g.r_hat_2, g.ell_hat_1])


def test_zero_inputs():
    assert np.all(_vec(tent_solve(0.0, 0.0, 0.0, 0.0)) == 0.0)


def test_point_base():
    g = tent_solve(2.0, 0.0, 0.0, 0.0)
    assert g.ell_hat_0 / 2.0 == pytest.approx((1 - math.cos(TH)) / (math.cos(K.alpha - TH) - K.cos))
    assert g.ell_hat_0 / 2.0 == pytest.approx(0.314, abs=1e-3)
    excess = (g.r_hat_2 - 2.0 * math.exp(K.cot * TH)) / 2.0
    assert excess == pytest.approx(point_base_excess(), abs=1e-14)
    assert excess >= 0.0066943


def test_k_tent_value_and_worst_case_formula():
    assert k_tent() == pytest.approx(0.966795, abs=1e-6)
    assert worst_case_ratio(K.alpha + TH - math.pi / 2) == pytest.approx(k_tent(), abs=1e-12)


def test_admissibility():
    assert tent_admissible(0.0, 1.0)
    assert not tent_admissible(1.0, 1.0)
    with pytest.raises(ValueError):
        tent_admissible(0.5, 0.0)


def test_reach_bound():
    angle, rounds = tent_reach_bound()
    assert angle == pytest.approx(7.86127, abs=1e-4)
    assert rounds == pytest.approx(1.05358, abs=1e-5)
    assert rounds == pytest.approx(angle / K.P, rel=1e-15)
    assert rounds > 1


def test_saturated_factor():
    assert saturated_final_factor() == pytest.approx(0.038815, abs=1e-6)


def test_lower_bound_without_base():
    assert tent_final_lower_bound(3.5, 0.0) == 3.5


def test_saturation_residual_random():
    rng = np.random.default_rng(7)
    worst = 0.0
    for r0, L, dq, dp in rng.uniform(-5, 5, size=(10_000, 4)):
        worst = max(worst, abs(tent_solve(r0, L, dq, dp).saturation_residual))
    assert worst <= 1e-12


@given(reals, reals, reals, reals, reals, reals, reals, reals, reals, reals)
def test_linearity(a, b, x0, x1, x2, x3, y0, y1, y2, y3):
    lhs = _vec(tent_solve(a * x0 + b * y0, a * x1 + b * y1, a * x2 + b * y2, a * x3 + b * y3))
    rhs = a * _vec(tent_solve(x0, x1, x2, x3)) + b * _vec(tent_solve(y0, y1, y2, y3))
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * (1 + np.abs(rhs).max()))


@given(st.floats(0, 5), st.floats(0, 5), st.floats(0, 5), st.floats(0, 5), st.floats(0.01, 1))
def test_final_value_monotone(r2, rt2, rbar, ell0, d):
    base = final_value(r2, rt2, rbar, ell0)
    assert final_value(r2 + d, rt2, rbar, ell0) > base
    assert final_value(r2, rt2, rbar, ell0 + d) < base


def test_projections_of_tent_directions():
    dq, dp = base_projections(cmath.exp(1j * TH))
    assert dq == pytest.approx(1.0)
    assert dp == pytest.approx(math.cos(K.alpha - math.pi / 2))


def _convex_base(rng):
    """Random convex polyline turning left from direction 0 up to theta_hat."""
    n = rng.integers(1, 6)
    dirs = np.sort(rng.uniform(0, TH, n))
    lens = rng.uniform(0, 1, n)
    chord = complex(np.sum(lens * np.exp(1j * dirs)))
    return float(lens.sum()), chord


def test_lower_bound_below_exact_final_value():
    rng = np.random.default_rng(11)
    for _ in range(100):
        L, chord = _convex_base(rng)
        r0 = rng.uniform(0.5, 3)
        dq, dp = base_projections(chord)
        g = tent_solve(r0, L, dq, dp)
        rtilde_bar = rng.uniform(0, 10)
        rtilde_2 = g.r_hat_2 - rng.uniform(0, 1)
        exact = final_value(g.r_hat_2, rtilde_2, rtilde_bar, g.ell_hat_0)
        assert tent_final_lower_bound(rtilde_bar, r0) <= exact + 1e-12
