"""Grid scans of the positivity and monotonicity inequalities.

Each registered case is a scaled final-value functional of the perturbed
spiral, evaluated on a parameter box.  A scan records the minimum and where
it is attained; a case passes when the minimum clears its threshold up to a
2% grid budget, and, for the delay-window criterion, when the functional is
nondecreasing in tau on the last window.

Parameters are named theta (perturbation angle), dphi (arc opening), sigma
(convex weight placing tau between the two ends of a case) and tau.
Axes named u are unit coordinates for boxes with parameter-dependent bounds.
"""
from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .fastest_saturated import HALF_PI, base_rho, crit, length_margin
from .perturbation import (
    arc_sources,
    boundary_h,
    hat_theta,
    in_negativity_region,
    pert_length_margin,
    rho_field,
    segment_sources,
)
from .tent import final_value, k_tent, point_base_ell0_factor, tent_solve

GRID_BUDGET = 0.02
THETA_MIN = 1e-3
MIN_RESOLUTION = 16


class ScanError(RuntimeError):
    """An evaluator failed; the message carries the offending coordinates."""


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    share: float = 1.0  # fraction of the resolution used on this axis

    def points(self, resolution: int) -> np.ndarray:
        # cell centres: case formulas hold on open intervals whose ends sit on
        # kernel breakpoints, so the closed ends are never sampled
        n = max(MIN_RESOLUTION // 2, int(round(resolution * self.share)))
        return self.lo + (np.arange(n) + 0.5) * (self.hi - self.lo) / n


@dataclass(frozen=True)
class CaseSpec:
    id: str
    family: str
    axes: tuple[Axis, ...]
    scaling: str
    threshold: float
    evaluator: Callable[..., np.ndarray]
    mode: str = "min-positive"
    window: tuple[float, float] | None = None  # tau window for increasing-on-window
    paper_min: float | None = None
    paper_argmin: dict | None = None
    note: str = ""

    def __post_init__(self):
        assert self.axes, "empty domain"
        assert all(a.hi >= a.lo for a in self.axes), "inverted axis"
        assert math.isfinite(self.threshold)
        assert self.mode in ("min-positive", "increasing-on-window")


@dataclass
class ScanReport:
    id: str
    grid: tuple[int, ...]
    min: float
    argmin: dict
    threshold: float
    passed: bool
    ms: float
    monotone: bool | None = None
    excluded: int = 0
    notes: list = field(default_factory=list)

    def to_dict(self, timing: bool = True) -> dict:
        rec = {
            "id": self.id,
            "grid": list(self.grid),
            "min": self.min,
            "argmin": self.argmin,
            "threshold": self.threshold,
            "pass": self.passed,
        }
        if timing:
            rec["ms"] = round(self.ms, 3)
        if self.monotone is not None:
            rec["monotone"] = self.monotone
        if self.excluded:
            rec["excluded"] = self.excluded
        return rec

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing))


# shared pieces


@lru_cache(maxsize=1)
def _consts():
    k = crit()
    th = hat_theta()
    return k, th, th / k.P


def _E(tau):
    k = crit()
    return np.exp(k.c * k.P * tau)


def _w(theta, dphi):
    return 1.0 - np.cos(theta) + np.sin(theta) * dphi


def _S0(theta, dphi=0.0):
    k = crit()
    return k.cot * _w(theta, dphi) / k.sin


def _tent_value(tau, theta, dphi, L, dq, dq_pi2, r2_weight=1.0):
    """e^{-cP tau} times the closing ray of a tent started one round before tau."""
    k, th, ht = _consts()
    r0 = rho_field(tau - 1.0, theta, dphi) * _E(tau - 1.0)
    geo = tent_solve(r0, L, dq, dq_pi2)
    r2v = r2_weight * rho_field(tau - 1.0 + ht, theta, dphi) * _E(tau - 1.0 + ht)
    rbar = rho_field(tau, theta, dphi) * _E(tau)
    return final_value(geo.r_hat_2, r2v, rbar, geo.ell_hat_0)


def _tent_rescaled(tau, theta, dphi, L, dq, dq_pi2, r2_weight=1.0):
    return _tent_value(tau, theta, dphi, L, dq, dq_pi2, r2_weight) / _E(tau)


def _late_base(tau, theta, dphi):
    """rho one round earlier, shifted by the tent opening, with its growth factor."""
    _, _, ht = _consts()
    s = tau - 2.0 + ht
    return rho_field(s, theta, dphi) * _E(s)


def _mix(sigma, a, b):
    return (1.0 - sigma) * a + sigma * b


def _dphi_between(u, lo, hi):
    return lo + u * (hi - lo)


# segment cases (dphi = 0)


def _ss1(tau, theta):
    # rho outside the negativity region; points inside are excluded
    val = rho_field(tau, theta, 0.0) / theta**2
    inside = np.vectorize(lambda t, th: in_negativity_region("segment", float(t), float(th)))(tau, theta)
    return np.where(inside, np.nan, val)


def _ss2(theta):
    k, th, _ = _consts()
    return ((1.0 - np.cos(theta + th)) / (1.0 - math.cos(th)) - np.exp(k.cot * theta)) / theta


def ss2_limit() -> float:
    """theta -> 0 limit of the SS2 functional."""
    k, th, _ = _consts()
    return math.sin(th) / (1.0 - math.cos(th)) - k.cot


def _ss3(theta, sigma):
    k, th, ht = _consts()
    tau1 = 1.0 - theta / k.P
    tau = 1.0 + sigma * (tau1 - ht - 1e-3)
    z = np.zeros_like(tau)
    # the saturated comparison ray carries the S0 weight in this case
    return _tent_rescaled(tau, theta, 0.0, z, z, z, r2_weight=_S0(theta)) / theta**2


def _ss3b(theta, sigma):
    k, th, _ = _consts()
    tau = _mix(sigma, 2.0 - (theta + th) / k.P, 2.0 - np.maximum(theta, th) / k.P)
    ang = k.P * (2.0 - tau) - theta
    dq = np.cos(ang - th)
    dq2 = np.cos(ang - (k.alpha + th - HALF_PI))
    return _tent_rescaled(tau, theta, 0.0, np.ones_like(tau), dq, dq2) / theta**2


def _ss4(theta, sigma, shift=None):
    # shift: offset in the spiral-length exponent; the rescaled hat_tau by
    # default, hat_theta reproduces the literal plotting code
    k, th, ht = _consts()
    shift = ht if shift is None else shift
    tau = _mix(sigma, 2.0 - ht, 2.0 - theta / k.P)
    base = _late_base(tau, theta, 0.0)
    L = (1.0 - np.cos(theta)) / k.sin**2 + _S0(theta) * (np.exp(k.cot * k.P * (tau - 2.0 + shift)) - 1.0) / k.cos
    return _tent_rescaled(tau, theta, 0.0, L, base * k.cos, base * math.cos(HALF_PI - 2 * k.alpha)) / theta**2


def _ss5(theta, sigma):
    k, th, ht = _consts()
    tau = _mix(sigma, 2.0 - theta / k.P, 2.0 - ht)
    z = np.zeros_like(tau)
    return math.exp(-k.c * k.P) * _tent_value(tau, theta, 0.0, z, z, z) / theta**2


def _ss6(theta, sigma):
    k, th, ht = _consts()
    tau = _mix(sigma, 2.0 - np.minimum(theta, th) / k.P, 2.0)
    base = _late_base(tau, theta, 0.0)
    turn = -theta - k.P * (tau - 2.0)
    dq = base * k.cos - np.cos(turn - th)
    dq2 = base * math.cos(HALF_PI - 2 * k.alpha) - np.cos(turn - (k.alpha + th - HALF_PI))
    L = -1.0 + (1.0 - np.cos(theta)) * np.exp(k.cot * k.P * (tau - 2.0 + ht)) / k.sin**2
    return _tent_rescaled(tau, theta, 0.0, L, dq, dq2) / theta**2


def _ss7(tau, theta):
    k = crit()
    return (rho_field(tau, theta, 0.0) - k_tent() * math.exp(-2 * k.c * k.P) * rho_field(tau - 2.0, theta, 0.0)) / theta**2


# arc cases without a tent


@lru_cache(maxsize=4096)
def _h1(dphi: float) -> float:
    return boundary_h("h1", dphi)


def _h1_array(dphi) -> np.ndarray:
    d = np.asarray(dphi, dtype=float)
    return np.vectorize(lambda x: _h1(float(x)))(d)


def _f1(theta, dphi):
    k = crit()
    return k.cot / k.sin * _w(theta, dphi) * np.exp(k.cot * (k.P - dphi - theta)) - 1.0


def _sa2(theta, dphi):
    k = crit()
    return np.exp(k.cot * theta) * _f1(theta + _h1_array(dphi), dphi)


def arc_arc(theta, dphi, dtheta, ddphi):
    """Final value of the arc-arc perturbation (no scaling)."""
    k = crit()
    num = 1.0 - np.cos(theta + dtheta) + np.sin(theta + dtheta) * ddphi + np.sin(theta) * dphi
    den = 1.0 - np.cos(dtheta) + np.sin(dtheta) * ddphi
    return num / den - np.exp(k.cot * (dphi + theta)) + np.cos(theta + k.alpha) * (np.exp(k.cot * dphi) - 1.0) / k.cos


def _aa(theta, dphi):
    k = crit()
    return arc_arc(theta, k.tan, _h1_array(dphi), dphi) / theta


def _as1(theta):
    k, th, _ = _consts()
    val = (
        (1.0 - np.cos(theta + th) + np.sin(theta) * k.tan) / (1.0 - math.cos(th))
        - np.exp(1.0 + k.cot * theta)
        + np.cos(k.alpha + theta) * (math.e - 1.0) / k.cos
    )
    return val / theta


# arc cases closed by a tent


def _saturated_window(tau, theta, dphi):
    k, th, _ = _consts()
    weight = (1.0 - math.cos(th)) / (math.cos(k.alpha - th) - k.cos) * math.exp(-k.c * k.P)
    return rho_field(tau, theta, dphi) - weight * rho_field(tau - 1.0, theta, dphi)


def _at1(theta, dphi, sigma):
    k, th, ht = _consts()
    tau1 = 1.0 - (dphi + theta) / k.P
    tau = _mix(sigma, 1.0, 1.0 + tau1 - ht)
    return _saturated_window(tau, theta, dphi) / (theta * (theta + dphi))


def _at2(theta, dphi, sigma):
    k, th, _ = _consts()
    tau = _mix(sigma, 2.0 + (-dphi - theta - th) / k.P, 2.0 + (-dphi - np.maximum(theta, th)) / k.P)
    ang = k.P * (tau - 2.0) + th + theta + dphi
    L = np.ones_like(tau)
    return _tent_rescaled(tau, theta, dphi, L, np.cos(ang), np.cos(ang + k.alpha - HALF_PI)) / (theta * (theta + dphi))


def _at3(theta, dphi, sigma):
    k, th, _ = _consts()
    tau = _mix(sigma, 2.0 + (-dphi - th) / k.P, 2.0 - np.maximum(dphi + theta, th) / k.P)
    L = 1.0 - np.cos(theta) + np.sin(theta) * (k.P * (tau - 2.0) + th + dphi)
    dq = np.sin(theta) * math.cos(-HALF_PI)
    dq2 = np.sin(theta) * k.cos
    return _tent_rescaled(tau, theta, dphi, L, dq + 0.0 * tau, dq2 + 0.0 * tau) / (theta * (theta + dphi))


def _at4(theta, u, sigma):
    k, th, ht = _consts()
    dphi = _dphi_between(u, 0.0, th - theta)
    tau = _mix(sigma, 2.0 - ht, 2.0 + (-dphi - theta) / k.P)
    base = _late_base(tau, theta, dphi)
    L = _w(theta, dphi) * np.exp(k.cot * k.P * (tau - 2.0 + ht)) / k.sin**2
    return _tent_rescaled(tau, theta, dphi, L, base * k.cos, base * math.sin(2 * k.alpha)) / (theta * (theta + dphi))


def _at5(theta, dphi, sigma):
    k, th, _ = _consts()
    tau = _mix(sigma, 2.0 + (-dphi - theta) / k.P, 2.0 + (-dphi - th) / k.P)
    z = np.zeros_like(tau)
    return _tent_rescaled(tau, theta, dphi, z, z, z) / (theta * (theta + dphi))


def _turn_terms(tau, theta, dphi):
    k, th, _ = _consts()
    q = -np.cos(k.P * tau - 4 * math.pi - k.alpha + th - (k.alpha - dphi - theta))
    q2 = -np.cos((tau - 2.0) * k.P + th + k.alpha - HALF_PI + dphi + theta)
    return q, q2


def _at6(theta, u, sigma):
    k, th, _ = _consts()
    dphi = _dphi_between(u, np.maximum(th - theta, 0.0), k.tan)
    tau = _mix(sigma, 2.0 + (-dphi - np.minimum(theta, th)) / k.P, 2.0 - np.maximum(dphi, th) / k.P)
    L = -np.cos(theta) + np.sin(theta) * ((tau - 2.0) * k.P + th + dphi)
    q, q2 = _turn_terms(tau, theta, dphi)
    return _tent_rescaled(tau, theta, dphi, L, q, np.sin(theta) * k.cos + q2) / theta


def _at7(theta, dphi, sigma):
    k, th, ht = _consts()
    tau = _mix(sigma, 2.0 - np.minimum(dphi + theta, th) / k.P, 2.0 - dphi / k.P)
    base = _late_base(tau, theta, dphi)
    L = -1.0 + _w(theta, dphi) * np.exp(k.cot * k.P * (tau - 2.0 + ht)) / k.sin**2
    q, q2 = _turn_terms(tau, theta, dphi)
    return _tent_rescaled(tau, theta, dphi, L, base * k.cos + q, base * math.sin(2 * k.alpha) + q2) / (
        theta * (theta + dphi)
    )


def _at8(theta, dphi, sigma):
    k, th, _ = _consts()
    tau = _mix(sigma, 2.0 - dphi / k.P, 2.0 - th / k.P)
    st = np.sin(theta) + 0.0 * tau
    L = st * th
    dq = -st * math.cos(HALF_PI + th)
    dq2 = st * k.cos - st * math.cos(k.alpha + th)
    return _tent_rescaled(tau, theta, dphi, L, dq, dq2) / theta


def _at9(theta, dphi, sigma):
    k, th, ht = _consts()
    tau = _mix(sigma, 2.0 - np.minimum(dphi, th) / k.P, 2.0)
    base = _late_base(tau, theta, dphi)
    st = np.sin(theta)
    L = _w(theta, dphi) * (np.exp(k.cot * k.P * (tau - 2.0 + ht)) - 1.0) / k.sin**2 + st * (
        4 * math.pi + 2 * k.alpha - k.P * tau
    )
    dq = base * k.cos - st * math.cos(HALF_PI + th)
    dq2 = base * math.sin(2 * k.alpha) - st * math.cos(k.alpha + th)
    return _tent_rescaled(tau, theta, dphi, L, dq, dq2) / (theta * (theta + dphi))


def _at10(tau, theta, dphi):
    return _saturated_window(tau, theta, dphi) / (theta * (theta + dphi))


def _arc_rounds(tau, theta, dphi):
    return rho_field(tau, theta, dphi) / (theta * (theta + dphi))


# base spiral, lengths, optimal candidate


def _base(tau):
    return np.asarray(base_rho(tau), dtype=float)


def _len_base(tau):
    return np.asarray(length_margin(tau), dtype=float)


def _per_source(fn, *grids):
    """Apply a per-source function (vectorized in tau) over the remaining axes."""
    tau = grids[0]
    out = np.empty(np.broadcast_shapes(*(g.shape for g in grids)))
    flat_rest = [np.broadcast_to(g, out.shape) for g in grids[1:]]
    taus = np.broadcast_to(tau, out.shape)
    it = np.ndindex(out.shape[1:])
    for idx in it:
        sl = (slice(None),) + idx
        params = tuple(float(g[(0,) + idx]) for g in flat_rest)
        out[sl] = fn(taus[sl], *params)
    return out


def _len_segment(tau, theta):
    return _per_source(lambda t, th: pert_length_margin(t, segment_sources(th)) / th**2, tau, theta)


def _len_arc(tau, theta, dphi):
    return _per_source(lambda t, th, d: pert_length_margin(t, arc_sources(th, d)) / (th * (th + d)), tau, theta, dphi)


def _opt(tau):
    factor = point_base_ell0_factor() * math.exp(-crit().c * crit().P)
    return _base(tau) - factor * _base(tau - 1.0)


# registry


def _theta(hi: float = HALF_PI, lo: float = THETA_MIN) -> Axis:
    return Axis("theta", lo, hi)


def _sigma(lo: float = 0.0, hi: float = 1.0) -> Axis:
    return Axis("sigma", lo, hi)


DPHI_SHARE = 0.125  # share of the resolution on the dphi axis of 3-D boxes


@lru_cache(maxsize=1)
def cases() -> tuple[CaseSpec, ...]:
    k, th, ht = _consts()
    tan = k.tan
    dphi = Axis("dphi", 0.0, tan, DPHI_SHARE)
    unit = Axis("u", 0.0, 1.0, DPHI_SHARE)
    T = lambda lo, hi: Axis("tau", lo, hi)  # noqa: E731
    reg = [
        CaseSpec("BASE", "base", (T(0.0, 5.0),), "1", 0.0, _base, "increasing-on-window", (4.0, 5.0)),
        CaseSpec("LEN-BASE", "lengths", (T(0.0, 5.0),), "1", 0.67, _len_base, "increasing-on-window", (4.0, 5.0)),
        CaseSpec("LEN-SEG", "lengths", (T(1.0, 5.0), _theta(math.pi)), "theta^2", 0.117, _len_segment),
        CaseSpec("LEN-ARC", "lengths", (T(1.0, 5.0), _theta(), dphi), "theta(theta+dphi)", 0.27, _len_arc),
        CaseSpec("SS1", "segment-segment 1", (T(0.0, 5.0), _theta(math.pi)), "theta^2", 0.0, _ss1),
        CaseSpec("SS2", "segment-segment 2", (_theta(math.pi),), "theta", 0.0, _ss2, note="limit 3.45283"),
        CaseSpec(
            "SS3",
            "segment-segment 3",
            (_theta(math.pi), _sigma()),
            "theta^2",
            0.2,
            _ss3,
            paper_min=0.203057,
            paper_argmin={"theta": math.pi, "sigma": 1e-5 / (1.0 - math.pi / k.P - ht - 1e-3)},
        ),
        CaseSpec(
            "SS3b",
            "segment-segment 3",
            (_theta(math.pi), _sigma()),
            "theta^2",
            0.2,
            _ss3b,
            paper_min=0.218402,
            paper_argmin={"theta": math.pi, "sigma": 1e-3},
        ),
        CaseSpec("SS4", "segment-segment 4", (_theta(th - 1e-3), _sigma()), "theta^2", 0.14, _ss4),
        CaseSpec(
            "SS5",
            "segment-segment 5",
            (_theta(HALF_PI, th + 1e-3), _sigma(1e-3, 1.0)),
            "theta^2",
            2.91,
            _ss5,
            paper_min=2.91263,
            paper_argmin={"theta": HALF_PI, "sigma": 1e-3},
        ),
        CaseSpec(
            "SS6",
            "segment-segment 6",
            (_theta(HALF_PI), _sigma()),
            "theta^2",
            0.59,
            _ss6,
            paper_min=0.59,
            paper_argmin={"theta": HALF_PI, "sigma": 1e-3},
            note="0.59 bound holds for theta <= pi/2; see SS6-full",
        ),
        CaseSpec(
            "SS6-full",
            "segment-segment 6",
            (_theta(math.pi), _sigma()),
            "theta^2",
            0.0,
            _ss6,
            note="min 0.2519 at theta = pi, below 0.59 but positive",
        ),
        CaseSpec(
            "SS7", "segment-segment 6", (T(2.0, 5.0), _theta(math.pi)), "theta^2", 0.0, _ss7, "increasing-on-window", (4.0, 5.0)
        ),
        CaseSpec("SA2", "segment-arc", (_theta(), Axis("dphi", 0.0, tan)), "1", 0.0, _sa2),
        CaseSpec("AA", "arc-arc", (_theta(), Axis("dphi", 0.0, tan)), "theta", 4.5, _aa),
        CaseSpec("AS1", "arc-segment", (_theta(),), "theta", 14.0, _as1),
        CaseSpec("ARC-R23", "arc-arc", (T(1.0, 3.0), _theta(math.pi), dphi), "theta(theta+dphi)", 0.04, _arc_rounds),
        CaseSpec("AT1", "arc-tent 1", (_theta(), dphi, _sigma()), "theta(theta+dphi)", 0.35, _at1),
        CaseSpec(
            "AT2",
            "arc-tent 2",
            (_theta(), dphi, _sigma()),
            "theta(theta+dphi)",
            0.54,
            _at2,
            paper_min=0.546565,
            paper_argmin={"theta": HALF_PI, "dphi": 0.0, "sigma": 1e-4},
        ),
        CaseSpec(
            "AT3",
            "arc-tent 3",
            (_theta(th - 1e-4), dphi, _sigma()),
            "theta(theta+dphi)",
            0.74,
            _at3,
            paper_min=0.749654,
            paper_argmin={"theta": th - 1e-4, "dphi": 1e-3, "sigma": 1e-6},
        ),
        CaseSpec(
            "AT4",
            "arc-tent 4",
            (_theta(th - 1e-3), unit, _sigma()),
            "theta(theta+dphi)",
            0.74,
            _at4,
            paper_min=0.748399,
            paper_argmin={"theta": th - 1e-3, "u": 0.0, "sigma": 1e-3},
        ),
        CaseSpec(
            "AT5",
            "arc-tent 5",
            (_theta(HALF_PI, th + 1e-3), dphi, _sigma()),
            "theta(theta+dphi)",
            0.55,
            _at5,
            paper_min=0.559708,
            paper_argmin={"theta": HALF_PI, "dphi": 0.0, "sigma": 1e-3},
        ),
        CaseSpec("AT6", "arc-tent 6", (_theta(), unit, _sigma()), "theta", 0.38, _at6),
        CaseSpec("AT7", "arc-tent 7", (_theta(), Axis("dphi", 0.0, th, DPHI_SHARE), _sigma()), "theta(theta+dphi)", 0.28, _at7),
        CaseSpec("AT8", "arc-tent 8", (_theta(), Axis("dphi", th + 1e-3, tan, DPHI_SHARE), _sigma()), "theta", 0.76, _at8),
        CaseSpec("AT9", "arc-tent 9", (_theta(), dphi, _sigma()), "theta(theta+dphi)", 0.62, _at9),
        CaseSpec(
            "AT10", "arc-tent 10", (T(2.0, 5.0), _theta(), dphi), "theta(theta+dphi)", 0.59, _at10, "increasing-on-window", (4.0, 5.0)
        ),
        CaseSpec("OPT", "optimal", (T(1.0, 5.0),), "1", 0.0, _opt, "increasing-on-window", (4.0, 5.0)),
    ]
    return tuple(reg)


def get_case(case_id: str) -> CaseSpec:
    for c in cases():
        if c.id == case_id:
            return c
    raise KeyError(f"unknown case {case_id!r}")


def evaluate_case(case_id: str, **params: float) -> float:
    """Scaled functional of one case at a single parameter point."""
    spec = get_case(case_id)
    names = [a.name for a in spec.axes]
    missing = set(names) - set(params)
    if missing:
        raise ValueError(f"{case_id} needs {sorted(missing)}")
    args = [np.atleast_1d(np.asarray(params[n], dtype=float)) for n in names]
    return float(np.asarray(spec.evaluator(*args)).reshape(-1)[0])


def _mesh(spec: CaseSpec, resolution: int) -> list[np.ndarray]:
    pts = [a.points(resolution) for a in spec.axes]
    nd = len(pts)
    out = []
    for i, p in enumerate(pts):
        shape = [1] * nd
        shape[i] = p.size
        out.append(p.reshape(shape))
    return out


def _evaluate_grid(spec: CaseSpec, grids: list[np.ndarray], threads: int) -> np.ndarray:
    # chunks along the last axis keep tau (axis 0) contiguous for monotonicity checks
    shape = np.broadcast_shapes(*(g.shape for g in grids))
    last = len(shape) - 1
    n = shape[last]
    nchunks = max(1, min(n, 4 * max(threads, 1)))
    bounds = np.linspace(0, n, nchunks + 1).astype(int)

    def run(i):
        lo, hi = bounds[i], bounds[i + 1]
        sub = [g if g.shape[last] == 1 else g[..., lo:hi] for g in grids]
        try:
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                val = spec.evaluator(*sub)
        except Exception as exc:  # pragma: no cover - re-raised with context
            where = {a.name: (float(np.min(g)), float(np.max(g))) for a, g in zip(spec.axes, sub)}
            raise ScanError(f"{spec.id} failed on {where}: {exc}") from exc
        sub_shape = shape[:last] + (hi - lo,)
        return np.broadcast_to(np.asarray(val, dtype=float), sub_shape)

    if threads > 1 and nchunks > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(run, range(nchunks)))
    else:
        parts = [run(i) for i in range(nchunks)]
    return np.concatenate(parts, axis=last)


def _monotone_on_window(spec: CaseSpec, values: np.ndarray, tau: np.ndarray, slack: float = 1e-12) -> bool:
    lo, hi = spec.window
    sel = (tau >= lo - 1e-12) & (tau <= hi + 1e-12)
    win = values[sel]
    if win.shape[0] < 2:
        return True
    diffs = np.diff(win, axis=0)
    scale = np.maximum(np.abs(win[1:]), 1.0)
    return bool(np.all(np.isnan(diffs) | (diffs >= -slack * scale)))


def grid_scan(spec: CaseSpec, resolution: int = 200, threads: int = 1, threshold: float | None = None) -> ScanReport:
    if resolution < MIN_RESOLUTION:
        raise ValueError(f"resolution must be at least {MIN_RESOLUTION}")
    thr = spec.threshold if threshold is None else threshold
    t0 = time.perf_counter()
    grids = _mesh(spec, resolution)
    values = _evaluate_grid(spec, grids, threads)
    excluded = int(np.isnan(values).sum())
    if excluded == values.size:
        raise ScanError(f"{spec.id}: every grid point excluded")
    idx = np.unravel_index(int(np.nanargmin(values)), values.shape)
    vmin = float(values[idx])
    argmin = {a.name: float(np.asarray(g).reshape(-1)[idx[i]]) for i, (a, g) in enumerate(zip(spec.axes, grids))}
    passed = vmin >= thr - GRID_BUDGET * abs(thr)
    monotone = None
    if spec.mode == "increasing-on-window":
        tau = np.asarray(grids[0]).reshape(-1)
        monotone = _monotone_on_window(spec, values, tau)
        passed = passed and monotone
    ms = 1e3 * (time.perf_counter() - t0)
    return ScanReport(spec.id, values.shape, vmin, argmin, thr, bool(passed), ms, monotone, excluded)


def select(filter_text: str | None = None) -> list[CaseSpec]:
    """Cases whose id or family contains the filter (case-insensitive)."""
    if not filter_text:
        return list(cases())
    f = filter_text.lower()
    return [c for c in cases() if f == c.id.lower() or f in c.family.lower() or c.id.lower().startswith(f)]


def run_suite(filter_text: str | None = None, resolution: int = 200, threads: int = 1) -> list[ScanReport]:
    return [grid_scan(c, resolution, threads) for c in select(filter_text)]
