"""Acceptance criteria 1-11, one test (and one summary line) per criterion."""
import math
import os
import time

import mpmath as mp
import numpy as np
import pytest
from scipy.integrate import quad

from artifact import spectral
from artifact.fastest_saturated import (
    asymptotic_coefficient_branches,
    base_rho,
    crit,
    length_constant_SL,
    length_margin,
    length_ratio,
    limiting_length_ratio,
)
from artifact.kernels import KernelParams, critical_params, eval_g, eval_m, eval_primitives
from artifact.optimal_candidate import optimal_asymptotics, range_boundaries
from artifact.perturbation import (
    arc_sources,
    asymptotic_slope,
    boundary_h,
    d2h1,
    delta_rho,
    dh1,
    hat_theta,
    pert_length_margin,
    segment_sources,
)
from artifact.spiral_rde import (
    PiecewiseCurve,
    divergence_check,
    first_zero,
    monotone_variant,
    saturated_ray,
    saturated_ray_rescaled,
    saturated_source,
    solve_rde_steps,
)
from artifact.tent import k_tent, point_base_excess, tent_reach_bound, tent_solve
from artifact.verifier import GRID_BUDGET, get_case, grid_scan, run_suite, ss2_limit

K = crit()
BUDGET = 1.0 - GRID_BUDGET
THETAS = np.linspace(1e-3, math.pi, 400)


def g_series(tau):
    mp.mp.dps = 30
    tau = mp.mpf(tau)
    return float(sum((-1) ** k * mp.e ** (tau - k) * (tau - k) ** k / mp.factorial(k) for k in range(int(tau) + 1)))


def test_criterion_1_constants(acceptance_log):
    spectral._critical_constants.cache_clear()
    t0 = time.perf_counter()
    c = spectral.critical_constants()
    th = hat_theta()
    dt = time.perf_counter() - t0
    ok = (
        abs(c.alpha_bar - 1.1783) <= 1e-4
        and abs(c.sigma_bar - 2.61443) <= 1e-5
        and abs(c.c_bar - 0.27995) <= 1e-5
        and abs(th - 0.506134) <= 1e-6
        and dt < 1.0
    )
    acceptance_log(1, ok, f"alpha={c.alpha_bar:.7f} sigma={c.sigma_bar:.6f} c={c.c_bar:.6f} theta_hat={th:.7f} ({dt:.3f} s)")
    assert ok


def test_criterion_2_kernel_oracles(acceptance_log):
    p = critical_params()
    # series against a method-of-steps solve of the angle-variable RDE from a unit atom
    sol = solve_rde_steps(PiecewiseCurve.zero(), p.alpha, PiecewiseCurve.dirac(0.0), 6 * p.period, p.period / 1024)
    tau = np.linspace(0, 6, 601)
    series = np.array([g_series(t) for t in tau])
    steps = sol(p.period * tau) * np.exp(-p.c * p.period * tau)
    err_g = np.max(np.abs(series - steps) / np.maximum(1, np.abs(series)))
    # closed-form m against quadrature of g against the source density
    def m_quad(t, t1, t2):
        f = lambda s: float(eval_g(t - s)) * math.exp(-p.c * p.period * s) * p.period
        hi = min(t, t2)
        pts = [t - j for j in range(8) if t1 < t - j < hi]
        return quad(f, t1, hi, points=pts or None, limit=200, epsabs=1e-13, epsrel=1e-13)[0] if hi > t1 else 0.0

    err_m = max(abs(eval_m(t, t1, t2) - m_quad(t, t1, t2)) for t1, t2 in [(0.2, 0.7), (0.5, 1.0)] for t in np.linspace(0, 5, 41))
    # primitive RDE residual by a fourth-order finite difference
    rng = np.random.default_rng(2)
    phi = rng.uniform(0.01, 4 * p.period, 300)
    h = 1e-4
    f = lambda x: eval_primitives(x, "calG")
    d = (-f(phi + 2 * h) + 8 * f(phi + h) - 8 * f(phi - h) + f(phi - 2 * h)) / (12 * h)
    res = d - f(phi) / math.tan(p.alpha) + f(phi - p.period) / math.sin(p.alpha) - 1.0 / math.sin(p.alpha)
    err_p = np.max(np.abs(res) / np.maximum(1, np.abs(f(phi))))
    ok = err_g <= 1e-6 and err_m <= 1e-7 and err_p <= 1e-6
    acceptance_log(2, ok, f"g steps {err_g:.1e}, m quad {err_m:.1e}, primitive residual {err_p:.1e}")
    assert ok


def test_criterion_3_saturated_spiral(acceptance_log):
    tau = np.linspace(3.0, 5.0, 4001)
    diverge = {}
    for alpha in (K.alpha - 0.01, K.alpha):
        rho = saturated_ray_rescaled(tau, alpha)
        a = KernelParams.for_angle(alpha).a
        diverge[alpha] = divergence_check(tau, rho, 4.0, a) and monotone_variant(tau, rho, 4.0)
    fast = K.alpha + 0.1
    Pf = 2 * math.pi + fast
    phi = np.linspace(0, 12 * Pf, 200_001)
    zero = first_zero(phi, saturated_ray(phi, fast))
    sol = solve_rde_steps(PiecewiseCurve.zero(), fast, saturated_source(), 12 * Pf, Pf / 1024)
    ok = all(diverge.values()) and zero is not None and sol.closed
    acceptance_log(3, ok, f"diverges at alpha_bar-0.01 and alpha_bar: {all(diverge.values())}; alpha_bar+0.1 closes at phi={zero:.4f}")
    assert ok


def test_criterion_4_fastest_saturated(acceptance_log):
    tau = np.linspace(0, 5, 5 * 4096 + 1)
    rho = base_rho(tau)
    r5 = tau >= 4
    m = length_margin(tau)
    _, rate6 = length_ratio(6.0)
    checks = [
        rho.min() > 0,
        np.all(np.diff(rho[r5]) > 0),
        m.min() >= 0.67,
        np.all(np.diff(m[r5]) >= 0),
        abs(length_constant_SL() + 2.7473) <= 1e-4,
        abs(rate6 / limiting_length_ratio() - 1) <= 0.02,
    ]
    ok = all(checks)
    acceptance_log(
        4, ok, f"min rho {rho.min():.4g}, min margin {m.min():.4f}, S_L {length_constant_SL():.5f}, rate at 6 {rate6:.5f}"
    )
    assert ok


def _segment_minima():
    out = dict(r2=np.inf, knot=np.inf, r3=np.inf, slope=np.inf)
    for t in THETAS:
        s = segment_sources(t)
        t2 = t * t
        out["r2"] = min(out["r2"], (delta_rho(np.linspace(1, 1 + s.tau1, 801), s) / t2).min())
        out["knot"] = min(out["knot"], delta_rho(1 + s.tau1, s) / t2)
        out["r3"] = min(out["r3"], (delta_rho(np.linspace(2, 3, 801), s) / t2).min())
        tau = np.linspace(3, 4, 801)
        # d/dtau rho = rho(tau) - rho(tau - 1) once all sources are in the past
        out["slope"] = min(out["slope"], ((delta_rho(tau, s) - delta_rho(tau - 1, s)) / t2).min())
    slopes = np.array([asymptotic_slope(segment_sources(t)) / t**2 for t in THETAS])
    out["asym"] = (slopes.min(), slopes.max())
    return out


@pytest.fixture(scope="module")
def segment_minima():
    return _segment_minima()


def test_criterion_5_parts_other_than_slope(segment_minima):
    m = segment_minima
    assert m["r2"] >= BUDGET * 0.17959 and m["r2"] == pytest.approx(0.17959, abs=1e-5)
    assert m["knot"] >= BUDGET * 0.226635 and m["knot"] == pytest.approx(0.226635, abs=1e-5)
    assert m["r3"] >= BUDGET * 0.262163 and m["r3"] == pytest.approx(0.262163, abs=1e-5)
    lo, hi = m["asym"]
    assert lo == pytest.approx(0.0816077, abs=1e-6) and hi == pytest.approx(0.278936, rel=GRID_BUDGET)
    # the slope is positive, so the perturbation does increase on [3, 4]
    assert m["slope"] > 0


def test_printed_slope_drops_a_term():
    # the printed 0.142304 is the (3, pi) slope with the S1 difference taken as zero
    s = arc_sources(math.pi, 0.0)
    g = eval_g
    printed = (s.S0 * (g(3) - g(2)) + (s.S2 + s.S4) * (g(2) - g(1)) + s.S5 * (g(1) - 1)) / math.pi**2
    true = (delta_rho(3.0, segment_sources(math.pi)) - delta_rho(2.0, segment_sources(math.pi))) / math.pi**2
    assert printed == pytest.approx(0.142304, abs=1e-6)
    assert true == pytest.approx(0.0816107, abs=1e-6)


@pytest.mark.xfail(strict=True, reason="slope minimum on [3, 4] is 0.0815, not 0.142304; see ledger")
def test_criterion_5_segment_minima(acceptance_log, segment_minima):
    m = segment_minima
    lo, hi = m["asym"]
    parts = {
        "[1,1+tau1]": m["r2"] >= BUDGET * 0.17959,
        "1+tau1": m["knot"] >= BUDGET * 0.226635,
        "[2,3]": m["r3"] >= BUDGET * 0.262163,
        "slope[3,4]": m["slope"] >= BUDGET * 0.142304,
        "asymptotic": lo >= BUDGET * 0.0816077 and hi <= 0.278936 / BUDGET,
    }
    ok = all(parts.values())
    failed = [k for k, v in parts.items() if not v]
    acceptance_log(
        5,
        ok,
        f"{m['r2']:.6f} / {m['knot']:.6f} / {m['r3']:.6f} / slope {m['slope']:.6f} / [{lo:.7f}, {hi:.6f}]"
        + (f"; failing: {', '.join(failed)}" if failed else ""),
    )
    assert ok


def test_criterion_6_arc_boundaries(acceptance_log):
    grid = np.linspace(0, K.tan, 400)
    d1 = np.array([dh1(x) for x in grid])
    d2 = np.array([d2h1(x) for x in grid])
    h0, ht = boundary_h("h1", 0.0), boundary_h("h1", K.tan)
    rep = grid_scan(get_case("ARC-R23"), 200)
    ok = (
        abs(h0 - hat_theta()) <= 1e-12
        and abs(ht - 0.117533) <= 1e-4
        and d1.min() >= -1 - 1e-12
        and d1.max() <= 0.0252
        and d2.min() >= 0.0168
        and rep.passed
    )
    acceptance_log(
        6, ok, f"h1(tan)={ht:.6f}, dh1 in [{d1.min():.4f}, {d1.max():.5f}], min d2h1 {d2.min():.5f}, rounds 2-3 min {rep.min:.5f}"
    )
    assert ok


def test_criterion_7_length_margins(acceptance_log):
    tau = np.linspace(1, 5, 801)
    seg = min((pert_length_margin(tau, segment_sources(t)) / t**2).min() for t in THETAS)
    arc = grid_scan(get_case("LEN-ARC"), 200)
    ok = seg >= 0.117 and arc.passed
    acceptance_log(7, ok, f"segment {seg:.5f} theta^2, arc {arc.min:.5f} theta(theta+dphi)")
    assert ok


def test_criterion_8_tent(acceptance_log):
    angle, rounds = tent_reach_bound()
    rng = np.random.default_rng(11)
    worst = max(abs(tent_solve(*row).saturation_residual) for row in rng.uniform(-5, 5, size=(10_000, 4)))
    ok = (
        abs(k_tent() - 0.966795) <= 1e-6
        and abs(angle - 7.86127) <= 1e-4
        and abs(rounds - 1.05358) <= 1e-4
        and worst <= 1e-12
        and point_base_excess() >= 0.0066943
    )
    acceptance_log(
        8, ok, f"K_tent {k_tent():.7f}, reach ({angle:.5f}, {rounds:.5f}), residual {worst:.1e}, excess {point_base_excess():.7f}"
    )
    assert ok


def test_criterion_9_optimal_candidate(acceptance_log):
    b = range_boundaries()
    a = optimal_asymptotics()
    ok = (
        abs(b["segment_arc_start"] - 7.73645) <= 1e-4
        and abs(b["tent_positive_h"] - 9.48195) <= 1e-4
        and abs(a.K_asympt - 0.149681) <= 1e-5
        and abs(a.ratio - 0.976359) <= 1e-5
        and abs(a.ell0_factor - 0.306042) <= 1e-3
        and abs(a.r2_factor - 1.15869) <= 1e-3
        and abs(a.length_factor - 0.588497) <= 1e-3
    )
    acceptance_log(
        9,
        ok,
        f"boundaries {b['segment_arc_start']:.5f} / {b['tent_positive_h']:.5f}, K {a.K_asympt:.6f}, ratio {a.ratio:.6f}, "
        f"{a.ell0_factor:.6f} / {a.r2_factor:.5f} / {a.length_factor:.6f}",
    )
    assert ok


def test_criterion_10_case_suite(acceptance_log):
    t0 = time.perf_counter()
    reports = run_suite(None, 200, os.cpu_count() or 1)
    dt = time.perf_counter() - t0
    failed = [r.id for r in reports if not r.passed]
    limit_ok = abs(ss2_limit() - 3.45283) <= 1e-5
    ok = not failed and limit_ok and dt < 300
    acceptance_log(
        10, ok, f"{len(reports) - len(failed)}/{len(reports)} cases pass, SS2 limit {ss2_limit():.5f} ({dt:.1f} s)"
        + (f"; failing: {', '.join(failed)}" if failed else "")
    )
    assert ok


def test_criterion_11_cross_identities(acceptance_log):
    tau = np.linspace(0, 5, 501)
    arc_seg = max(np.max(np.abs(delta_rho(tau, arc_sources(t, 0.0)) - delta_rho(tau, segment_sources(t)))) for t in THETAS[::20])
    arc_b, seg_b = asymptotic_coefficient_branches(K.sin)
    branch = abs(arc_b - seg_b)
    rng = np.random.default_rng(5)
    lin = 0.0
    for _ in range(200):
        x, y = rng.uniform(-5, 5, (2, 4))
        s, t = rng.uniform(-3, 3, 2)
        gx, gy, gz = tent_solve(*x), tent_solve(*y), tent_solve(*(s * x + t * y))
        for f in ("ell_hat_0", "r_hat_2", "ell_hat_1"):
            lin = max(lin, abs(getattr(gz, f) - s * getattr(gx, f) - t * getattr(gy, f)))
    ok = arc_seg <= 1e-12 and branch <= 1e-10 and lin <= 1e-12
    acceptance_log(11, ok, f"arc/segment {arc_seg:.1e}, branch gap {branch:.1e}, tent linearity {lin:.1e}")
    assert ok
