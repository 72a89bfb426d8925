"""Derivative of the fastest saturated family with respect to its starting point.

A perturbation of the starting point changes the ray by a combination of
delayed kernels.  In the rescaled variable tau (one round = 2pi + alpha)

    segment:  rho = S0 g(tau) + S1 g(tau - tau1) + S2 g(tau - 1) + D d_1 + S3 g(tau - 2)
    arc:      rho = S0 g(tau) + S1 g(tau - tau1) + S2 g(tau - tau2) + S3 m(tau, tau2, 1)
                    + S4 g(tau - 1) + D d_1 + S5 g(tau - 2)

where d_1 is a Dirac mass at tau = 1.  The pointwise value never contains
the mass; it is reported by `atom`.  All angles are at the critical angle.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import IO, Iterable, Union

import numpy as np
from scipy.optimize import brentq

from .fastest_saturated import LENGTH_FACTOR, crit
from .kernels import eval_g, eval_M, eval_m, length_g, length_m
from .spectral import DomainError

ROOT_TOL = 1e-10


class BracketError(DomainError):
    """A boundary curve has no root in the searched interval."""


@dataclass(frozen=True)
class SegmentSources:
    theta: float
    S0: float
    S1: float
    S2: float
    S3: float
    D: float
    tau1: float

    kind = "segment"

    @property
    def scale(self) -> float:
        return self.theta * self.theta


@dataclass(frozen=True)
class ArcSources:
    theta: float
    delta_phi: float
    S0: float
    S1: float
    S2: float
    S3: float
    S4: float
    S5: float
    D: float
    tau1: float
    tau2: float

    kind = "arc"

    @property
    def scale(self) -> float:
        return self.theta * (self.theta + self.delta_phi)

    def as_segment(self) -> SegmentSources:
        """Collapse to the segment bundle; exact only when delta_phi = 0."""
        if self.delta_phi != 0.0:
            raise DomainError("only the delta_phi = 0 bundle has a segment form")
        return SegmentSources(self.theta, self.S0, self.S1, self.S2 + self.S4, self.S5, self.D, self.tau1)


Sources = Union[SegmentSources, ArcSources]


def _check_theta(theta: float) -> None:
    if not (0.0 <= theta <= math.pi):
        raise DomainError(f"theta={theta} outside [0, pi]")


def _check_dphi(delta_phi: float) -> None:
    if not (0.0 <= delta_phi <= crit().tan + 1e-12):
        raise DomainError(f"delta_phi={delta_phi} outside [0, tan(alpha)]")


def segment_sources(theta: float) -> SegmentSources:
    _check_theta(theta)
    k = crit()
    one_minus = 1.0 - math.cos(theta)
    lift = math.cos(k.alpha - theta) - k.cos
    return SegmentSources(
        theta=theta,
        S0=k.cot * one_minus / k.sin,
        S1=-k.sin / k.P * math.exp(k.c * theta),
        S2=k.sin / k.P - one_minus / (k.P * k.sin) + k.cot * lift / k.P,
        S3=-lift / k.P**2,
        D=lift / k.P,
        tau1=1.0 - theta / k.P,
    )


def _arc_coefficients(theta, delta_phi) -> dict:
    """Arc source coefficients; numpy-broadcast over theta and delta_phi."""
    k = crit()
    st = np.sin(theta)
    w = 1.0 - np.cos(theta) + delta_phi * st
    d = k.sin * (st - k.cot * w) / k.P
    return dict(
        S0=k.cot * w / k.sin,
        S1=-k.sin / k.P * np.exp(k.c * (delta_phi + theta)),
        S2=k.sin * np.cos(theta) / k.P * np.exp(k.c * delta_phi),
        S3=-st,
        S4=k.cos * (-2.0 * k.cot * w + st) / k.P,
        S5=-d / k.P,
        D=d,
        tau1=1.0 - (delta_phi + theta) / k.P,
        tau2=1.0 - delta_phi / k.P,
    )


def arc_sources(theta: float, delta_phi: float) -> ArcSources:
    _check_theta(theta)
    _check_dphi(delta_phi)
    coef = {name: float(v) for name, v in _arc_coefficients(theta, delta_phi).items()}
    return ArcSources(theta=theta, delta_phi=delta_phi, **coef)


def rho_field(tau, theta, delta_phi=0.0) -> np.ndarray:
    """Arc-form rho on broadcast arrays of (tau, theta, delta_phi), without the mass.

    Same value as `delta_rho(tau, arc_sources(theta, delta_phi))`, for grid scans.
    """
    c = _arc_coefficients(np.asarray(theta, dtype=float), np.asarray(delta_phi, dtype=float))
    t = np.asarray(tau, dtype=float)
    t, th = np.broadcast_arrays(t, np.asarray(theta, dtype=float) + np.zeros_like(np.asarray(delta_phi, dtype=float)))
    shape = t.shape

    def bc(x):
        return np.broadcast_to(x, shape)

    val = (
        bc(c["S0"]) * eval_g(t)
        + bc(c["S1"]) * eval_g(t - bc(c["tau1"]))
        + bc(c["S2"]) * eval_g(t - bc(c["tau2"]))
        + bc(c["S4"]) * eval_g(t - 1.0)
        + bc(c["S5"]) * eval_g(t - 2.0)
        + bc(c["S3"]) * eval_m(t, bc(c["tau2"]), 1.0)
    )
    return np.asarray(val, dtype=float).reshape(shape)


def sources(kind: str, theta: float, delta_phi: float = 0.0) -> Sources:
    if kind == "segment":
        return segment_sources(theta)
    if kind == "arc":
        return arc_sources(theta, delta_phi)
    raise DomainError(f"unknown perturbation kind {kind!r}")


def _as_arc(src: Sources) -> ArcSources:
    # the segment bundle is an arc bundle with tau2 = 1 and no m-term
    if isinstance(src, ArcSources):
        return src
    return ArcSources(src.theta, 0.0, src.S0, src.S1, 0.0, 0.0, src.S2, src.S3, src.D, src.tau1, 1.0)


def _ret(val: np.ndarray, scalar: bool):
    return float(val) if scalar else val


def delta_rho(tau, src: Sources):
    """Pointwise value of the rescaled perturbation, without the Dirac mass."""
    t = np.asarray(tau, dtype=float)
    a = _as_arc(src)
    val = (
        a.S0 * np.asarray(eval_g(t))
        + a.S1 * np.asarray(eval_g(t - a.tau1))
        + a.S2 * np.asarray(eval_g(t - a.tau2))
        + a.S4 * np.asarray(eval_g(t - 1.0))
        + a.S5 * np.asarray(eval_g(t - 2.0))
    )
    if a.S3 != 0.0:
        val = val + a.S3 * np.asarray(eval_m(t, a.tau2, 1.0))
    return _ret(val, t.ndim == 0)


def atom(src: Sources) -> tuple[float, float]:
    """(position, weight) of the Dirac mass in rho."""
    return 1.0, src.D


def first_round_rho(tau, src: Sources):
    """Explicit form on [0, 1): g = e^tau there."""
    t = np.asarray(tau, dtype=float)
    a = _as_arc(src)
    val = a.S0 * np.exp(t) + a.S1 * np.exp(t - a.tau1) * (t >= a.tau1)
    if isinstance(src, ArcSources):
        k = crit()
        on = t >= a.tau2
        val = val + a.S2 * np.exp(t - a.tau2) * on
        # m(tau, tau2, 1) on [tau2, 1): P int_{tau2}^{tau} e^{tau - s} e^{-cPs} ds
        lam = 1.0 + k.c * k.P
        mterm = k.P * np.exp(t) * (np.exp(-lam * a.tau2) - np.exp(-lam * np.maximum(t, a.tau2))) / lam
        val = val + a.S3 * mterm * on
    return _ret(val, t.ndim == 0)


# boundaries of the negativity region


def _w(theta: float, delta_phi: float) -> float:
    return 1.0 - math.cos(theta) + math.sin(theta) * delta_phi


def f1(theta: float, delta_phi: float) -> float:
    """Sign of rho on [tau1, tau2)."""
    k = crit()
    return k.cot / k.sin * _w(theta, delta_phi) * math.exp(k.cot * (k.P - delta_phi - theta)) - 1.0


def f2(theta: float, delta_phi: float) -> float:
    """Sign of rho at tau = tau2 (right limit)."""
    return tau3_equation(theta, delta_phi, delta_phi)


def f4(theta: float, delta_phi: float) -> float:
    """Sign of rho as tau -> 1 from the left."""
    return tau3_equation(theta, delta_phi, 0.0)


def tau3_equation(theta: float, delta_phi: float, theta3: float) -> float:
    """Positive multiple of rho(1 - theta3/P) for theta3 in [0, delta_phi]."""
    k = crit()
    return (
        k.cot / k.sin * _w(theta, delta_phi) * math.exp(k.cot * (k.P - theta3))
        - math.exp(k.cot * (delta_phi + theta - theta3))
        + math.cos(theta) * math.exp(k.cot * (delta_phi - theta3))
        - math.sin(theta) * float(eval_M(delta_phi - theta3, 0.0, delta_phi))
    )


@lru_cache(maxsize=None)
def hat_theta() -> float:
    """Boundary angle of the segment negativity region."""
    k = crit()
    f = lambda t: k.cot * (1.0 - math.cos(t)) / k.sin - math.exp(-k.cot * (k.P - t))
    return brentq(f, 0.0, 0.5 * math.pi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


@lru_cache(maxsize=4096)
def _h1(delta_phi: float) -> float:
    if delta_phi == 0.0:
        return hat_theta()
    return brentq(f1, 0.0, 0.5 * math.pi, args=(delta_phi,), xtol=ROOT_TOL)


def _negative_band_end(f, delta_phi: float, n: int = 400) -> float:
    """Largest theta with f(., delta_phi) < 0 on (0, theta); 0 if f >= 0 near 0+."""
    grid = np.linspace(0.0, 0.5 * math.pi, n + 1)[1:]
    # f vanishes at theta = 0, so the sign near 0+ is read from f/theta
    vals = [f(t, delta_phi) for t in grid]
    if vals[0] >= 0.0:
        return 0.0
    for lo, hi, vlo, vhi in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if vlo < 0.0 <= vhi:
            return brentq(f, lo, hi, args=(delta_phi,), xtol=ROOT_TOL)
    return float(grid[-1])


@lru_cache(maxsize=4096)
def _h2(delta_phi: float) -> float:
    return _negative_band_end(f2, delta_phi)


@lru_cache(maxsize=4096)
def _h3(delta_phi: float) -> float:
    return _negative_band_end(f4, delta_phi)


def dh1(delta_phi: float, theta: float | None = None) -> float:
    """Implicit derivative of h1; theta defaults to h1(delta_phi)."""
    k = crit()
    th = _h1(delta_phi) if theta is None else theta
    den = math.cos(k.alpha - th) - k.cos + math.sin(k.alpha - th) * delta_phi
    return -1.0 + k.sin * math.cos(th) * delta_phi / den


def d2h1(delta_phi: float, theta: float | None = None) -> float:
    """Second derivative of h1: partial in delta_phi plus partial in theta times dh1."""
    k = crit()
    th = _h1(delta_phi) if theta is None else theta
    den = math.cos(k.alpha - th) - k.cos + math.sin(k.alpha - th) * delta_phi
    first = k.sin * (math.cos(k.alpha - th) - k.cos) * math.cos(th) / den**2
    second = k.sin * delta_phi * (-k.sin + k.cos * math.sin(th) + k.cos * delta_phi) / den**2 * dh1(delta_phi, th)
    return first + second


def boundary_h(which: str, *args: float, strict: bool = True) -> float:
    """h1, h2, h3 as functions of delta_phi, and tau3 as a function of (theta, delta_phi).

    h2 and h3 bound the negative band on [tau2, 1); they are nonzero only for
    small delta_phi.  With strict=True an empty band raises BracketError.
    """
    if which == "tau3":
        theta, delta_phi = args
        return tau3(theta, delta_phi)
    (delta_phi,) = args
    _check_dphi(delta_phi)
    if which == "h1":
        return _h1(float(delta_phi))
    if which in ("h2", "h3"):
        val = (_h2 if which == "h2" else _h3)(float(delta_phi))
        if strict and val == 0.0:
            raise BracketError(f"{which} is undefined at delta_phi={delta_phi}")
        return val
    raise DomainError(f"unknown boundary {which!r}")


def tau3(theta: float, delta_phi: float) -> float:
    """Time after which rho < 0 on [tau2, 1) in the band h2 <= theta < h3."""
    k = crit()
    lo, hi = tau3_equation(theta, delta_phi, 0.0), tau3_equation(theta, delta_phi, delta_phi)
    if lo >= 0.0 or hi < 0.0:
        raise BracketError("tau3 is defined only for h2 <= theta < h3")
    th3 = brentq(lambda s: tau3_equation(theta, delta_phi, s), 0.0, delta_phi, xtol=ROOT_TOL)
    return 1.0 - th3 / k.P


RESIDUAL_BOX = (3.0, 3.12, 2.37)


def in_negativity_region(kind: str, tau: float, theta: float, delta_phi: float = 0.0) -> bool:
    """Membership in the region where rho may be <= 0.

    For the arc the residual late-time pocket is only known through a
    bounding box, so points in that box are reported as members.
    """
    _check_theta(theta)
    if theta == 0.0:
        return True
    k = crit()
    if kind == "segment":
        t1 = 1.0 - theta / k.P
        if t1 <= tau <= 1.0 and theta <= hat_theta():
            return True
        return tau == 1.0 and theta >= 2.0 * k.alpha
    if kind != "arc":
        raise DomainError(f"unknown perturbation kind {kind!r}")
    _check_dphi(delta_phi)
    t1 = 1.0 - (theta + delta_phi) / k.P
    t2 = 1.0 - delta_phi / k.P
    if t1 <= tau < t2 and theta <= _h1(delta_phi):
        return True
    if t2 <= tau < 1.0:
        h2 = _h2(delta_phi)
        if theta <= h2:
            return True
        if h2 <= theta < _h3(delta_phi):
            return tau >= tau3(theta, delta_phi)
    t, th, dp = RESIDUAL_BOX
    return tau >= t and theta > th and delta_phi > dp


# lengths


def initial_length(src: Sources) -> float:
    """Length change accumulated before the perturbed spiral saturates."""
    a = _as_arc(src)
    return _w(a.theta, a.delta_phi) / crit().sin ** 2


def delta_length(tau, src: Sources, kind: str | None = None):
    """Change of the barrier length, tau rounds after the first saturated angle."""
    if kind is not None and kind != src.kind:
        raise DomainError(f"bundle is {src.kind}, not {kind}")
    t = np.asarray(tau, dtype=float)
    if np.any(t < 0.0):
        raise DomainError("length is tracked from the first saturated angle on")
    k = crit()
    a = _as_arc(src)
    e = math.exp(k.c * k.P)
    val = (
        initial_length(src)
        + a.S0 * np.asarray(length_g(t))
        + a.S1 * math.exp(k.c * k.P * a.tau1) * np.asarray(length_g(t - a.tau1))
        + a.S2 * math.exp(k.c * k.P * a.tau2) * np.asarray(length_g(t - a.tau2))
        + a.S4 * e * np.asarray(length_g(t - 1.0))
        + a.D * e * (t >= 1.0) / k.sin
        + a.S5 * e * e * np.asarray(length_g(t - 2.0))
    )
    if a.S3 != 0.0:
        val = val + a.S3 * np.asarray(length_m(t, a.tau2, 1.0))
    return _ret(val, t.ndim == 0)


def pert_length_margin(tau, src: Sources, kind: str | None = None):
    """rho(tau) - 2.08 e^{-cP tau} dL(tau - 1), defined for tau >= 1."""
    k = crit()
    t = np.asarray(tau, dtype=float)
    val = np.asarray(delta_rho(t, src)) - LENGTH_FACTOR * np.exp(-k.c * k.P * t) * np.asarray(
        delta_length(t - 1.0, src, kind)
    )
    return _ret(val, t.ndim == 0)


def asymptotic_slope(src: Sources, kind: str | None = None) -> float:
    """Coefficient of tau in the affine growth of rho (unscaled)."""
    if kind is not None and kind != src.kind:
        raise DomainError(f"bundle is {src.kind}, not {kind}")
    k = crit()
    a = _as_arc(src)
    m_slope = (math.exp(-k.c * k.P * a.tau2) - math.exp(-k.c * k.P)) / k.c
    return 2.0 * (a.S0 + a.S1 + a.S2 + a.S3 * m_slope + a.S4 + a.S5)


def write_surface_csv(
    out: IO[str],
    kind: str,
    thetas: Iterable[float],
    delta_phis: Iterable[float],
    taus: Iterable[float],
) -> int:
    """Write theta,delta_phi,tau,value rows; returns the number of rows."""
    writer = csv.writer(out)
    writer.writerow(["theta", "delta_phi", "tau", "value"])
    taus = np.asarray(list(taus), dtype=float)
    n = 0
    for th in thetas:
        for dp in delta_phis if kind == "arc" else [0.0]:
            vals = delta_rho(taus, sources(kind, th, dp))
            for t, v in zip(taus, np.atleast_1d(vals)):
                writer.writerow([f"{th:.17g}", f"{dp:.17g}", f"{t:.17g}", f"{v:.17g}"])
                n += 1
    return n
