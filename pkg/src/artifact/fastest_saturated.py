"""Fastest saturated spiral around an initial fire ball of radius a.

Everything is at the critical angle.  The spiral first follows the level set
(an arc of the unit circle, or nothing in the segment regime), then a
tangent segment, then the saturated RDE.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .kernels import critical_params, eval_G, eval_M, eval_g, eval_m, length_g, length_m
from .spectral import TWO_PI, DomainError

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class _Crit:
    alpha: float
    c: float
    P: float
    sin: float
    cos: float
    tan: float
    cot: float


@lru_cache(maxsize=1)
def crit() -> _Crit:
    p = critical_params()
    a = p.alpha
    return _Crit(a, p.c, p.period, math.sin(a), math.cos(a), math.tan(a), 1.0 / math.tan(a))


@dataclass(frozen=True)
class CaseStudyStructure:
    radius: float
    regime: str
    delta_phi_a: float
    theta_a: float
    phi_bar_0: float

    @property
    def theta_bar_a(self) -> float:
        return self.theta_a + crit().alpha


def structure_for_radius(a: float) -> CaseStudyStructure:
    """Arc regime iff a < sin(alpha_bar); else the segment regime with cos(theta_a) = a."""
    if not (0.0 <= a <= 1.0):
        raise DomainError("radius must lie in [0, 1]")
    k = crit()
    if a < k.sin:
        dphi = k.tan - a / k.cos
        theta = HALF_PI - k.alpha
        return CaseStudyStructure(a, "arc", dphi, theta, dphi + theta)
    theta = math.acos(min(1.0, a))
    return CaseStudyStructure(a, "segment", 0.0, theta, theta)


def fastest_ray_table(phi: float, a: float) -> float:
    """Explicit round-by-round formulas, valid up to the start of the delayed regime."""
    k = crit()
    s = structure_for_radius(a)
    if s.regime == "arc":
        dphi, phi0 = s.delta_phi_a, s.phi_bar_0
        if phi < dphi:
            return 1.0
        if phi < phi0:
            return 1.0 / math.cos(phi - dphi)
        kappa1 = 1.0 / k.sin
        if phi < TWO_PI:
            return kappa1 * math.exp(k.cot * (phi - phi0))
        kappa2 = kappa1 * math.exp(k.cot * (TWO_PI - phi0)) - 1.0
        if phi < TWO_PI + HALF_PI:
            return kappa2 * math.exp(k.cot * (phi - TWO_PI))
        kappa3 = kappa2 * math.exp(HALF_PI * k.cot)
        end = TWO_PI + HALF_PI + dphi
        if phi < end:
            e = math.exp(k.cot * (phi - TWO_PI - HALF_PI))
            return kappa3 * e + k.tan * (1.0 - e)
        if phi == end:
            e = math.exp(k.cot * dphi)
            return e * kappa3 + k.tan * (1.0 - e) - k.cot
        raise DomainError("beyond the explicit table; use fastest_ray")
    tb = s.theta_bar_a
    phi0 = s.phi_bar_0
    if phi < phi0:
        return math.sin(tb) / math.sin(tb - phi)
    kappa1 = math.sin(tb) / k.sin
    if phi < TWO_PI:
        return kappa1 * math.exp(k.cot * (phi - phi0))
    kappa2 = kappa1 * math.exp(k.cot * (TWO_PI - phi0)) - 1.0
    if phi < TWO_PI + tb:
        return kappa2 * math.exp(k.cot * (phi - TWO_PI))
    if phi == TWO_PI + tb:
        return kappa2 * math.exp(k.cot * tb) - math.sin(tb - k.alpha) / k.sin
    raise DomainError("beyond the explicit table; use fastest_ray")


def table_end(a: float) -> float:
    """Last angle covered by fastest_ray_table."""
    s = structure_for_radius(a)
    if s.regime == "arc":
        return TWO_PI + HALF_PI + s.delta_phi_a
    return TWO_PI + s.theta_bar_a


def fastest_ray(phi, a: float):
    """r_a(phi): explicit first-round pieces, then the kernel superposition."""
    k = crit()
    s = structure_for_radius(a)
    arr = np.atleast_1d(np.asarray(phi, dtype=float))
    out = np.empty_like(arr)
    early = arr < s.phi_bar_0
    for i in np.flatnonzero(early):
        out[i] = fastest_ray_table(float(arr[i]), a)
    late = arr[~early]
    if late.size:
        x = late - s.phi_bar_0
        # second-round shift taken from the table end so the jump lands exactly there
        x2 = late - table_end(a)
        if s.regime == "arc":
            val = (
                eval_G(x) / k.sin
                - eval_G(late - TWO_PI)
                - eval_M(late, TWO_PI + HALF_PI, TWO_PI + HALF_PI + s.delta_phi_a)
                - k.cot * eval_G(x2)
            )
        else:
            tb = s.theta_bar_a
            val = math.sin(tb) / k.sin * eval_G(x) - eval_G(late - TWO_PI) - math.sin(tb - k.alpha) / k.sin * eval_G(x2)
        out[~early] = val
    return float(out[0]) if np.ndim(phi) == 0 else out


# a = 0 spiral in the rescaled variable, tau = 0 at phi = tan + pi/2 - alpha


def base_shifts() -> tuple[float, float]:
    """(tau1, tau2) = (1 - (pi/2 + tan)/P, 1 - tan/P)."""
    k = crit()
    return 1.0 - (HALF_PI + k.tan) / k.P, 1.0 - k.tan / k.P


def base_rho(tau):
    k = crit()
    t1, t2 = base_shifts()
    tau = np.asarray(tau, dtype=float)
    val = (
        eval_g(tau) / k.sin
        - math.exp(-k.c * k.P * t1) * np.asarray(eval_g(tau - t1))
        - np.asarray(eval_m(tau, t2, 1.0))
        - k.cot * math.exp(-k.c * k.P) * np.asarray(eval_g(tau - 1.0))
    )
    return float(val) if np.ndim(val) == 0 else val


def base_length(tau):
    """Barrier length of the a = 0 spiral up to phi = phi_bar_0 + P tau."""
    k = crit()
    t1, t2 = base_shifts()
    t = np.atleast_1d(np.asarray(tau, dtype=float))
    out = np.zeros_like(t)
    start_arc = -(HALF_PI - k.alpha + k.tan) / k.P
    start_seg = -(HALF_PI - k.alpha) / k.P
    arc = (t >= start_arc) & (t < start_seg)
    out[arc] = k.P * t[arc] + HALF_PI - k.alpha + k.tan
    seg = (t >= start_seg) & (t < 0)
    out[seg] = k.tan + 1.0 / np.tan(k.alpha - k.P * t[seg])
    sat = t >= 0
    ts = t[sat]
    out[sat] = (
        k.tan
        + k.cot
        + length_g(ts) / k.sin
        - length_g(ts - t1)
        - length_m(ts, t2, 1.0)
        - k.cot * length_g(ts - 1.0)
    )
    return float(out[0]) if np.ndim(tau) == 0 else out


LENGTH_FACTOR = 2.08


def length_margin(tau):
    """rho(tau) - 2.08 e^{-c P tau} L(tau - 1)."""
    k = crit()
    tau = np.asarray(tau, dtype=float)
    val = np.asarray(base_rho(tau)) - LENGTH_FACTOR * np.exp(-k.c * k.P * tau) * np.asarray(base_length(tau - 1.0))
    return float(val) if val.ndim == 0 else val


def length_constant_SL() -> float:
    """1/sin - 1 - tan - cot, the constant part of the asymptotic length."""
    k = crit()
    return 1.0 / k.sin - 1.0 - k.tan - k.cot


def limiting_length_ratio() -> float:
    """Limit of rho(tau) / (e^{-cP tau} L(tau - 1)), equal to e^{cP} c sin."""
    k = crit()
    return math.exp(k.c * k.P) * k.c * k.sin


def asymptotic_coefficient(a: float) -> float:
    """Coefficient of 2 phi e^{c phi} in the growth of r_a."""
    k = crit()
    s = structure_for_radius(a)
    c = k.c
    if s.regime == "arc":
        d = s.delta_phi_a
        return (
            math.exp(-c * (d + HALF_PI - k.alpha)) / k.sin
            - math.exp(-c * TWO_PI)
            - (math.exp(-c * (TWO_PI + HALF_PI)) - math.exp(-c * (TWO_PI + HALF_PI + d))) / c
            - k.cot * math.exp(-c * (TWO_PI + HALF_PI + d))
        )
    return _segment_coefficient(s.theta_a)


def _segment_coefficient(theta: float) -> float:
    k = crit()
    c = k.c
    return (
        math.sin(theta + k.alpha) * math.exp(-c * theta) / k.sin
        - math.exp(-c * TWO_PI)
        - math.sin(theta) * math.exp(-c * (TWO_PI + theta + k.alpha)) / k.sin
    )


def asymptotic_coefficient_branches(a: float) -> tuple[float, float]:
    """Both branch formulas at the same radius (meaningful near a = sin(alpha))."""
    k = crit()
    c = k.c
    d = max(0.0, k.tan - a / k.cos)
    arc = (
        math.exp(-c * (d + HALF_PI - k.alpha)) / k.sin
        - math.exp(-c * TWO_PI)
        - (math.exp(-c * (TWO_PI + HALF_PI)) - math.exp(-c * (TWO_PI + HALF_PI + d))) / c
        - k.cot * math.exp(-c * (TWO_PI + HALF_PI + d))
    )
    return arc, _segment_coefficient(math.acos(min(1.0, a)))


def k_asympt() -> float:
    """Growth constant K with r_0(phi) ~ K phi e^{c phi}, in the form used downstream.

    The segment term is discounted by e^{-c(2pi + alpha)} here, whereas the
    two-branch coefficient discounts it by e^{-c(2pi + pi/2 + tan)}.  The
    tent asymptotics are calibrated on this form.
    """
    k = crit()
    c = k.c
    return 2.0 * (
        math.exp(-c * (k.tan + HALF_PI - k.alpha)) / k.sin
        - math.exp(-c * TWO_PI)
        - (math.exp(-c * (TWO_PI + HALF_PI)) - math.exp(-c * (TWO_PI + HALF_PI + k.tan))) / c
        - k.cot * math.exp(-c * k.P)
    )


def base_rho_slope() -> float:
    """Exact slope of the affine asymptote of base_rho."""
    k = crit()
    t1, t2 = base_shifts()
    c, P = k.c, k.P
    return 2.0 * (
        1.0 / k.sin
        - math.exp(-c * P * t1)
        - (math.exp(-c * P * t2) - math.exp(-c * P)) / c
        - k.cot * math.exp(-c * P)
    )


def length_ratio(tau: float, h: float = 1e-4) -> tuple[float, float]:
    """(value ratio, growth-rate ratio) of rho(tau) against e^{-cP tau} L(tau - 1).

    Both sides grow linearly, so the value ratio approaches its limit like
    1/tau while the ratio of tau-derivatives settles within a few rounds.
    """
    k = crit()
    f = lambda t: math.exp(-k.c * k.P * t) * base_length(t - 1.0)
    value = base_rho(tau) / f(tau)
    rate = (base_rho(tau + h) - base_rho(tau - h)) / (f(tau + h) - f(tau - h))
    return value, rate
