"""Optimal closing spiral for a point ignition, as a function of the closing angle.

The barrier starts at (1, 0) outside the unit ball.  Depending on the
closing angle phi_bar the candidate is

  (i)   the fastest saturated spiral (radius a = 0);
  (ii)  a segment of length h in direction phi_bar, then a level-set arc;
  (iii) unit-circle arc, a tangent segment h, then a level-set arc or a tent;
  (iv)  the fastest saturated spiral up to phi_bar - (2pi + alpha), then a tent.

Angles use the same origin as `fastest_saturated.fastest_ray`.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar

from .fastest_saturated import HALF_PI, crit, fastest_ray, k_asympt, structure_for_radius
from .perturbation import boundary_h, f1, hat_theta
from .spectral import TWO_PI, DomainError
from .tent import final_value, tent_final_lower_bound, tent_solve

H_TOL = 1e-10


def range_boundaries() -> dict[str, float]:
    """Closing angles where the structure of the candidate changes."""
    k = crit()
    th = hat_theta()
    return {
        "segment_arc_start": TWO_PI + HALF_PI - boundary_h("h1", k.tan),
        "arc_case_start": TWO_PI + HALF_PI,
        "tent_positive_h": TWO_PI + HALF_PI + k.tan - (k.sin - math.sin(k.alpha - th)) / k.cos,
        "tent_angle_admissible": TWO_PI + HALF_PI + (k.sin - math.sin(th) * k.cos) / (k.cos * math.cos(th)),
        "saturated_tent_start": TWO_PI + HALF_PI + k.tan,
    }


@dataclass
class OptimalPlan:
    phi_bar: float
    range_id: str
    pieces: list = field(default_factory=list)
    r_opt: float = float("nan")
    h: float = 0.0
    delta_phi_check: float | None = None
    tent_angle_admissible: bool | None = None

    def to_json(self) -> str:
        rec = {"phi_bar": self.phi_bar, "pieces": self.pieces, "r_opt": self.r_opt}
        rec.update({k: v for k, v in asdict(self).items() if k not in rec})
        return json.dumps(rec)


# range (ii): segment in direction phi_bar from (1, 0), then an arc


def _seg_geometry(phi_bar: float, h: float) -> tuple[float, float, float, float]:
    """(ell, phi_check, delta_phi_check, theta_check) for range (ii)."""
    k = crit()
    ell = math.sqrt(1.0 + h * h + 2.0 * h * math.cos(phi_bar))
    phi_c = math.asin(h * math.sin(phi_bar - TWO_PI) / ell)
    dphi = k.tan - h / ell
    theta = HALF_PI + phi_c - (phi_bar - TWO_PI)
    return ell, phi_c, dphi, theta


def _arc_geometry(phi_bar: float, h: float) -> tuple[float, float, float, float]:
    """Same quantities for range (iii): the segment is tangent to the unit circle."""
    k = crit()
    ell = math.sqrt(1.0 + h * h)
    phi_c = math.atan(h)
    dphi = k.tan - (phi_bar - TWO_PI - HALF_PI + h) / ell
    return ell, phi_c, dphi, phi_c


def _critical_h(geometry, phi_bar: float) -> float:
    # h such that the perturbation angle sits on the h1 curve
    k = crit()

    def crit_eq(h: float) -> float:
        _, _, dphi, theta = geometry(phi_bar, h)
        return f1(theta, min(max(dphi, 0.0), k.tan))

    lo = 0.0
    if crit_eq(lo) >= 0.0:
        return 0.0
    hi = 0.05
    while crit_eq(hi) < 0.0:
        hi *= 2.0
        if hi > 50.0:
            raise DomainError("no critical segment length found")
    return brentq(crit_eq, lo, hi, xtol=H_TOL)


def _value_range_ii(phi_bar: float, h: float) -> float:
    k = crit()
    ell, phi_c, dphi, _ = _seg_geometry(phi_bar, h)
    return ell / k.sin * math.exp(k.cot * (phi_bar - (phi_c + dphi + HALF_PI - k.alpha))) - math.exp(
        k.cot * (phi_bar - TWO_PI)
    ) - h


def _unit_arc_terms(phi_bar: float) -> float:
    k = crit()
    psi = phi_bar - TWO_PI - HALF_PI
    return math.exp(k.cot * (phi_bar - TWO_PI)) + (math.exp(k.cot * psi) - 1.0) / k.cot


def _value_range_iii_arc(phi_bar: float, h: float) -> float:
    k = crit()
    ell, phi_c, dphi, _ = _arc_geometry(phi_bar, h)
    return ell / k.sin * math.exp(k.cot * (k.P - (phi_c + dphi))) - _unit_arc_terms(phi_bar) - h


def tent_segment_length(phi_bar: float) -> float:
    """Segment length h that saturates the tent endpoint in range (iii)."""
    k = crit()
    th = hat_theta()
    return (k.cos * (phi_bar - TWO_PI - HALF_PI) - math.sin(k.alpha - th)) / (math.cos(k.alpha - th) - k.cos)


def _value_range_iii_tent(phi_bar: float, h: float) -> float:
    k = crit()
    th = hat_theta()
    lead = math.cos(math.atan(h) - th) / k.sin * math.sqrt(1.0 + h * h)
    return lead * math.exp(k.cot * (k.P - th)) - _unit_arc_terms(phi_bar) - h


# range (iv): tent over the a = 0 spiral


def _base_tangent_measure_points(t0: float, t1: float) -> list[float]:
    k = crit()
    phi0 = structure_for_radius(0.0).phi_bar_0
    pts = []
    for j in range(-1, 8):
        for b in (phi0, TWO_PI, TWO_PI + HALF_PI, TWO_PI + HALF_PI + k.tan):
            p = b + j * k.P + k.alpha  # tangent angle of a saturated point
            if t0 < p < t1:
                pts.append(p)
    return sorted(pts)


def base_window(t_start: float, width: float | None = None) -> tuple[float, float, float]:
    """(L, dq_theta, dq_perp) of the a = 0 barrier over tangent angles [t_start, t_start + width].

    Tangent angle 0 carries the unit radial path from the ignition point to
    (1, 0), the corner that feeds tangent angles below pi/2.  Then comes the
    unit-circle arc, the tangent segment (a single tangent
    angle carrying length cot(alpha)), and the saturated spiral.
    """
    k = crit()
    th = hat_theta() if width is None else width
    t_end = t_start + th
    perp_shift = k.alpha + hat_theta() - HALF_PI
    acc = np.zeros(3)

    def add(weight_fn, lo, hi):
        if hi <= lo:
            return
        pts = [p for p in _base_tangent_measure_points(lo, hi)]
        for j, proj in enumerate((None, lambda w: math.cos(th - w), lambda w: math.cos(w - perp_shift))):
            f = (lambda t: weight_fn(t)) if proj is None else (lambda t, proj=proj: weight_fn(t) * proj(t - t_start))
            acc[j] += quad(f, lo, hi, points=pts or None, limit=200, epsabs=1e-13, epsrel=1e-12)[0]

    def atom(t, length):
        if t_start <= t <= t_end:
            w = t - t_start
            acc[:] += length * np.array([1.0, math.cos(th - w), math.cos(w - perp_shift)])

    atom(0.0, 1.0)
    arc_lo, arc_hi = HALF_PI, HALF_PI + k.tan
    add(lambda t: 1.0, max(t_start, arc_lo), min(t_end, arc_hi))
    atom(arc_hi, k.cot)
    add(lambda t: fastest_ray(t - k.alpha, 0.0) / k.sin, max(t_start, arc_hi), t_end)
    return float(acc[0]), float(acc[1]), float(acc[2])


def _value_range_iv(phi_bar: float) -> tuple[float, float]:
    k = crit()
    th = hat_theta()
    phi_hat_0 = phi_bar - k.P
    r0 = fastest_ray(phi_hat_0, 0.0)
    L, dq_t, dq_p = base_window(phi_hat_0 - TWO_PI)
    geo = tent_solve(r0, L, dq_t, dq_p)
    r_bar = fastest_ray(phi_bar, 0.0)
    value = final_value(geo.r_hat_2, fastest_ray(phi_hat_0 + th, 0.0), r_bar, geo.ell_hat_0)
    return value, tent_final_lower_bound(r_bar, r0)


def r_opt(phi_bar: float) -> OptimalPlan:
    if phi_bar < 0.0:
        raise DomainError("phi_bar must be nonnegative")
    k = crit()
    th = hat_theta()
    b = range_boundaries()
    if phi_bar < b["segment_arc_start"]:
        return OptimalPlan(
            phi_bar,
            "i",
            [
                {"kind": "level_set_arc", "delta_phi": k.tan},
                {"kind": "segment", "length": k.cot, "direction": k.tan + HALF_PI},
                {"kind": "saturated_arc"},
            ],
            float(fastest_ray(phi_bar, 0.0)),
        )
    if phi_bar < b["arc_case_start"]:
        h = _critical_h(_seg_geometry, phi_bar)
        ell, phi_c, dphi, _ = _seg_geometry(phi_bar, h)
        return OptimalPlan(
            phi_bar,
            "ii",
            [
                {"kind": "segment", "length": h, "direction": phi_bar},
                {"kind": "level_set_arc", "delta_phi": dphi, "radius": ell},
                {"kind": "segment", "length": ell * k.cot, "direction": phi_c + dphi + HALF_PI},
                {"kind": "saturated_arc"},
            ],
            _value_range_ii(phi_bar, h),
            h,
            dphi,
        )
    if phi_bar < b["saturated_tent_start"]:
        psi = phi_bar - TWO_PI - HALF_PI
        # the arc closes until its angle budget dphi_check reaches zero, which is
        # exactly where the tent becomes angle-admissible (h = tan(theta_hat))
        if phi_bar < b["tent_angle_admissible"]:
            h = _critical_h(_arc_geometry, phi_bar)
            ell, phi_c, dphi, _ = _arc_geometry(phi_bar, h)
            return OptimalPlan(
                phi_bar,
                "iii-arc",
                [
                    {"kind": "level_set_arc", "delta_phi": psi, "radius": 1.0},
                    {"kind": "segment", "length": h, "direction": phi_bar},
                    {"kind": "level_set_arc", "delta_phi": dphi, "radius": ell},
                    {"kind": "segment", "length": ell * k.cot, "direction": psi + phi_c + dphi + HALF_PI},
                    {"kind": "saturated_arc"},
                ],
                _value_range_iii_arc(phi_bar, h),
                h,
                dphi,
            )
        h = tent_segment_length(phi_bar)
        return OptimalPlan(
            phi_bar,
            "iii-tent",
            [
                {"kind": "level_set_arc", "delta_phi": psi, "radius": 1.0},
                {"kind": "segment", "length": h, "direction": phi_bar},
                {"kind": "tent", "theta": th},
                {"kind": "saturated_arc"},
            ],
            _value_range_iii_tent(phi_bar, h),
            h,
            None,
            True,
        )
    value, _ = _value_range_iv(phi_bar)
    return OptimalPlan(
        phi_bar,
        "iv",
        [
            {"kind": "level_set_arc", "delta_phi": k.tan},
            {"kind": "segment", "length": k.cot, "direction": k.tan + HALF_PI},
            {"kind": "saturated_arc", "until": phi_bar - k.P},
            {"kind": "tent", "theta": th},
            {"kind": "saturated_arc"},
        ],
        value,
        0.0,
        None,
        True,
    )


def r_opt_lower_bound(phi_bar: float) -> float:
    """Convex-base lower bound on the range (iv) value."""
    if phi_bar < range_boundaries()["saturated_tent_start"]:
        raise DomainError("the bound applies to the saturated tent range")
    return _value_range_iv(phi_bar)[1]


# first-round tangent curve


def r_curve_tangent(x, n, n_xi) -> np.ndarray:
    """Unit tangent of the curve of saturated points, oriented with u increasing."""
    n = np.asarray(n, dtype=float)
    v = n - np.asarray(n_xi, dtype=float) * crit().cos
    norm = float(np.hypot(v[0], v[1]))
    assert norm > 0.0, "degenerate frame"
    return v / norm


def _frames_unit_circle(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # fire from the origin: t = x/|x|; second barrier continues along the unit circle
    rad = math.hypot(x[0], x[1])
    t = x / rad
    n = np.array([-t[1], t[0]])
    b = math.sqrt(max(rad * rad - 1.0, 0.0))
    a = math.atan2(x[1], x[0]) - math.atan(b)
    t_xi = np.array([-math.sin(a), math.cos(a)])
    n_xi = np.array([-t_xi[1], t_xi[0]])
    return t, n, n_xi


def _ray_angle(x: np.ndarray) -> float:
    t, n, n_xi = _frames_unit_circle(x)
    r = r_curve_tangent(x, n, n_xi)
    return math.acos(max(-1.0, min(1.0, float(r @ t))))


@dataclass(frozen=True)
class RCurveEnd:
    point: np.ndarray
    arclength: float
    angle: float  # angle between the curve and the fire ray at the end point


def integrate_r_curve(step: float = 1e-3, tol: float = 1e-9, max_len: float = 50.0) -> RCurveEnd:
    """Follow the saturated-point curve from (1, 0) until its angle with the ray stops decreasing.

    Fire from the origin, second barrier along the unit circle.  The angle
    starts above alpha, decreases, and touches alpha where the curve becomes
    tangent to the saturated spiral.  Midpoint steps in arclength; the last
    bracket is refined by golden-section search.
    """

    def rhs(x):
        _, n, n_xi = _frames_unit_circle(x)
        return r_curve_tangent(x, n, n_xi)

    def advance(x, h):
        return x + h * rhs(x + 0.5 * h * rhs(x))

    x = np.array([1.0, 0.0])
    s = 0.0
    prev, cur = None, _ray_angle(x)
    prev_x = x
    while s < max_len:
        y = advance(x, step)
        nxt = _ray_angle(y)
        if nxt >= cur:
            # minimum lies within [s - step, s + step] from prev_x
            base = prev_x if prev is not None else x
            base_s = s - step if prev is not None else s
            res = minimize_scalar(
                lambda h: _ray_angle(advance(base, h)),
                bounds=(0.0, 2.0 * step),
                method="bounded",
                options={"xatol": tol},
            )
            return RCurveEnd(advance(base, res.x), base_s + res.x, float(res.fun))
        prev, prev_x = cur, x
        x, s, cur = y, s + step, nxt
    raise DomainError("curve did not reach its critical slope")


# asymptotics


@dataclass(frozen=True)
class OptimalAsymptotics:
    K_asympt: float
    dq_theta_integral: float
    dq_theta_factor: float
    dq_perp_integral: float
    dq_perp_factor: float
    length_integral: float
    length_factor: float
    ell0_factor: float
    r2_factor: float
    ratio: float


def optimal_asymptotics() -> OptimalAsymptotics:
    """Tent over a linearly growing saturated base, relative to the a = 0 spiral."""
    k = crit()
    th = hat_theta()
    c = k.c
    e = math.exp(c * th)
    dqt = (c * (e - math.cos(th)) + math.sin(th)) / (1.0 + c * c)
    dqp = (c * (e * k.sin - math.sin(k.alpha + th)) + (e * k.cos - math.cos(k.alpha + th))) / (1.0 + c * c)
    lint = (e - 1.0) / c
    disc = math.exp(-c * k.P)
    ell0 = (disc * dqt / k.sin - disc * lint / k.sin + 1.0 - math.cos(th)) / (math.cos(k.alpha - th) - k.cos)
    r2 = (math.sin(k.alpha + th) + math.sin(th) * ell0 - dqp / k.sin * disc) / k.sin
    ratio = (r2 - e) * math.exp(k.cot * (k.P - th) - c * k.P) + 1.0 - ell0 * disc
    return OptimalAsymptotics(
        k_asympt(), dqt, dqt / k.sin, dqp, dqp / k.sin, lint, lint / k.sin, ell0, r2, ratio
    )
