import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from artifact.kernels import (
    KernelParams,
    asymptote,
    critical_params,
    eval_G,
    eval_M,
    eval_g,
    eval_m,
    eval_primitives,
    length2_g,
    length_g,
)
from artifact.spectral import DomainError

P0 = critical_params()
ONE = KernelParams(P0.alpha, 1.0, P0.c)


def g_oracle(tau, a=1.0):
    mp.mp.dps = 40
    tau = mp.mpf(tau)
    s = mp.mpf(0)
    k = 0
    while k <= tau:
        s += (-1) ** k * mp.e ** (a * (tau - k)) * (tau - k) ** k / mp.factorial(k)
        k += 1
    return float(s)


def m_quad(tau, t1, t2):
    k = P0
    f = lambda s: float(eval_g(tau - s)) * math.exp(-k.c * k.period * s) * k.period
    hi = min(tau, t2)
    if hi <= t1:
        return 0.0
    pts = [tau - j for j in range(0, 8) if t1 < tau - j < hi]
    return quad(f, t1, hi, points=pts or None, limit=200, epsabs=1e-13, epsrel=1e-13)[0]


def test_g_simple_values():
    assert eval_g(-0.5) == 0.0
    assert eval_g(0.5) == pytest.approx(math.exp(0.5), rel=1e-15)
    assert eval_g(1.5) == pytest.approx(math.exp(1.5) - 0.5 * math.exp(0.5), rel=1e-14)


@pytest.mark.parametrize("tau", [0.0, 0.3, 1.0, 1.7, 2.5, 3.999, 5.2, 6.0, 9.3])
def test_g_against_high_precision_series(tau):
    assert eval_g(tau) == pytest.approx(g_oracle(tau), rel=1e-12, abs=1e-12)


def test_g_vectorized_matches_scalar():
    t = np.linspace(-1, 7, 801)
    vec = eval_g(t)
    assert np.array_equal(vec, np.array([eval_g(float(x)) for x in t]))


def test_g_right_continuous_at_breakpoints():
    for k in (1, 2, 3):
        assert eval_g(float(k)) == pytest.approx(eval_g(k + 1e-12), abs=1e-9)


def test_g_solves_delay_equation():
    # rho' = rho - rho(. - 1) between breakpoints, by 4th-order central differences
    rng = np.random.default_rng(0)
    t = rng.uniform(0, 6, 1000)
    t = t[np.abs(t - np.round(t)) > 1e-3]
    h = 1e-4
    d = (-eval_g(t + 2 * h) + 8 * eval_g(t + h) - 8 * eval_g(t - h) + eval_g(t - 2 * h)) / (12 * h)
    assert np.max(np.abs(d - eval_g(t) + eval_g(t - 1))) <= 1e-6


def test_g_unit_jump_at_zero():
    assert eval_g(0.0) - eval_g(-1e-15) == 1.0


def test_G_rescaling_identity():
    phi = np.linspace(0, 6 * P0.period, 500)
    assert np.allclose(eval_G(phi) * np.exp(-P0.c * phi), eval_g(phi / P0.period), rtol=1e-14, atol=0)


def test_G_causal_and_rde():
    assert eval_G(-1.0) == 0.0
    a = P0.alpha
    rng = np.random.default_rng(1)
    phi = rng.uniform(0, 4 * P0.period, 400)
    phi = phi[np.abs(phi / P0.period - np.round(phi / P0.period)) > 1e-3]
    h = 1e-4
    d = (-eval_G(phi + 2 * h) + 8 * eval_G(phi + h) - 8 * eval_G(phi - h) + eval_G(phi - 2 * h)) / (12 * h)
    res = d - eval_G(phi) / math.tan(a) + eval_G(phi - P0.period) / math.sin(a)
    assert np.max(np.abs(res) / np.maximum(1, np.abs(eval_G(phi)))) <= 1e-6


def test_m_trivial_cases():
    assert eval_m(2.0, 0.5, 0.5) == 0.0
    assert eval_m(0.3, 0.5, 1.0) == 0.0
    assert eval_M(5.0, 1.0, 1.0) == 0.0


def test_m_against_quadrature_point():
    assert eval_m(1.7, 0.5, 1.0) == pytest.approx(m_quad(1.7, 0.5, 1.0), abs=1e-8)


@pytest.mark.parametrize("t1,t2", [(0.5, 1.0), (0.2, 0.9), (0.83, 1.0)])
def test_m_against_quadrature_on_grid(t1, t2):
    taus = np.linspace(0, 6, 61)
    err = max(abs(eval_m(t, t1, t2) - m_quad(t, t1, t2)) for t in taus)
    assert err <= 1e-7


def test_m_vectorized_in_window():
    t1 = np.array([0.2, 0.4, 0.6])
    vals = eval_m(2.5, t1, 1.0)
    assert np.allclose(vals, [eval_m(2.5, float(x), 1.0) for x in t1], rtol=1e-14)


def test_m_rejects_inverted_window():
    with pytest.raises(DomainError):
        eval_m(1.0, 0.9, 0.5)


def test_M_is_m_in_angle_variable():
    P = P0.period
    phi = np.linspace(0, 5 * P, 200)
    lhs = eval_M(phi, 0.5 * P, P) * np.exp(-P0.c * phi)
    assert np.allclose(lhs, eval_m(phi / P, 0.5, 1.0), rtol=1e-12, atol=1e-12)


def test_primitive_matches_trapezoid():
    phi = np.linspace(0, 3 * P0.period, 200_001)
    G = eval_G(phi) / math.sin(P0.alpha)
    trap = np.concatenate([[0], np.cumsum((G[1:] + G[:-1]) / 2 * np.diff(phi))])
    calG = eval_primitives(phi, "calG")
    assert np.max(np.abs(calG - trap) / np.maximum(1, np.abs(trap))) <= 1e-7


def test_primitive_causal():
    assert eval_primitives(-0.5, "calG") == 0.0
    assert eval_primitives(-0.5, "frakG") == 0.0


def test_primitive_rde_residual():
    # dcalG/dphi - cot calG + calG(. - P)/sin - H/sin = 0
    a = P0.alpha
    rng = np.random.default_rng(2)
    phi = rng.uniform(0.01, 4 * P0.period, 300)
    h = 1e-4
    f = lambda x: eval_primitives(x, "calG")
    d = (-f(phi + 2 * h) + 8 * f(phi + h) - 8 * f(phi - h) + f(phi - 2 * h)) / (12 * h)
    res = d - f(phi) / math.tan(a) + f(phi - P0.period) / math.sin(a) - 1.0 / math.sin(a)
    assert np.max(np.abs(res) / np.maximum(1, np.abs(f(phi)))) <= 1e-6


def test_second_primitive_is_integral_of_first():
    phi = np.linspace(0, 2.5 * P0.period, 100_001)
    c = eval_primitives(phi, "calG")
    trap = np.concatenate([[0], np.cumsum((c[1:] + c[:-1]) / 2 * np.diff(phi))])
    assert np.allclose(eval_primitives(phi, "frakG"), trap, rtol=1e-7, atol=1e-7)


def test_length_helpers_read_in_tau():
    t = np.linspace(0, 4, 41)
    assert np.allclose(length_g(t), eval_primitives(t * P0.period, "calG"))
    assert np.allclose(length2_g(t), eval_primitives(t * P0.period, "frakG"))


def test_primitives_need_critical_angle():
    with pytest.raises(DomainError):
        eval_primitives(1.0, "calG", KernelParams.for_angle(1.0))
    with pytest.raises(DomainError):
        eval_primitives(1.0, "nope")


def test_g_asymptote_band():
    t = np.linspace(2, 5, 301)
    assert np.max(np.abs(eval_g(t) - asymptote("g", t))) <= 0.06


def test_g_asymptote_is_affine():
    a, b, c = (asymptote("g", x) for x in (1.0, 2.0, 3.0))
    assert b - a == pytest.approx(c - b)


def test_m_asymptote_band():
    t = np.linspace(3, 5, 201)
    assert np.max(np.abs(eval_m(t, 0.5, 1.0) - asymptote("m", t, 0.5, 1.0))) <= 0.02


@given(st.floats(min_value=-2, max_value=8), st.floats(min_value=0.05, max_value=1.5))
def test_g_general_angle_matches_oracle(tau, a):
    p = KernelParams(P0.alpha, a, P0.c)
    assert eval_g(tau, p) == pytest.approx(g_oracle(tau, a), rel=1e-10, abs=1e-10)


@given(st.floats(min_value=-3, max_value=-1e-9))
def test_kernels_vanish_before_zero(t):
    assert eval_g(t) == 0.0
    assert eval_G(t * P0.period) == 0.0
    assert eval_m(t, 0.0, 0.5) == 0.0
