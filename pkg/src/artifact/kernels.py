"""Finite-series Green kernels of the spiral RDE.

g solves rho' = a rho - rho(. - 1) + delta_0 in the rescaled variable tau.
G(phi) = g(phi / P) e^{c phi} with P = 2pi + alpha is the same kernel in the
angle variable.  Every series is finite: the k-th term switches on at tau = k.
Values at breakpoints are right-continuous.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .spectral import TWO_PI, DomainError, coeff_a, critical_constants, exponent_c

ArrayLike = float | np.ndarray


@dataclass(frozen=True)
class KernelParams:
    alpha: float
    a: float
    c: float

    @classmethod
    def for_angle(cls, alpha: float) -> "KernelParams":
        return cls(alpha, coeff_a(alpha), exponent_c(alpha))

    @property
    def period(self) -> float:
        return TWO_PI + self.alpha

    @property
    def cot(self) -> float:
        return 1.0 / math.tan(self.alpha)

    def is_critical(self, tol: float = 1e-12) -> bool:
        return abs(self.alpha - critical_constants().alpha_bar) <= tol


@lru_cache(maxsize=1)
def critical_params() -> KernelParams:
    cc = critical_constants()
    return KernelParams(cc.alpha_bar, 1.0, cc.c_bar)


def _params(params: KernelParams | None) -> KernelParams:
    return critical_params() if params is None else params


def _out(x, scalar: bool):
    return float(x) if scalar else x


def eval_g(tau: ArrayLike, params: KernelParams | None = None) -> ArrayLike:
    """g(tau) = sum_{k <= floor(tau)} (-1)^k e^{a(tau-k)} (tau-k)^k / k!."""
    p = _params(params)
    t = np.asarray(tau, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    out = np.zeros_like(t)
    if t.size and np.nanmax(t) >= 0:
        kmax = int(math.floor(np.nanmax(t)))
        # one exponential for all terms: e^{a(t-k)} = e^{at} e^{-ak}
        base = np.exp(p.a * np.clip(t, 0.0, kmax + 1.0))
        for k in range(kmax + 1):
            s = t - k
            on = s >= 0
            if not on.any():
                break
            powk = np.ones_like(s)
            for _ in range(k):
                powk = powk * s
            coef = (-1) ** k * math.exp(-p.a * k) / math.factorial(k)
            out += np.where(on, coef * base * powk, 0.0)
    return _out(out[0], True) if scalar else out


def _exp_poly_tail(x: np.ndarray, k: int) -> np.ndarray:
    """e^x sum_{l<=k} (-x)^l / l! - 1, which equals the k-fold weighted primitive."""
    term = np.ones_like(x)
    acc = np.ones_like(x)
    for l in range(1, k + 1):
        term = term * (-x) / l
        acc = acc + term
    return np.exp(x) * acc - 1.0


def _m0(t: np.ndarray, tau1, p: KernelParams) -> np.ndarray:
    # P * int_{tau1}^{inf} g(t - s) e^{-cPs} ds; only s <= t contributes
    P = p.period
    b = P * p.cot  # equals a + c P
    t, tau1 = np.broadcast_arrays(t, np.asarray(tau1, dtype=float))
    out = np.zeros(t.shape)
    if t.size == 0:
        return out
    x0 = t - tau1
    if not np.nanmax(x0) >= 0:
        return out
    kmax = int(math.floor(np.nanmax(x0)))
    x0c = np.clip(x0, 0.0, kmax + 1.0)
    decay = np.exp(-p.c * P * (t - x0 + x0c))  # e^{-cP t} on the support
    grow = np.exp(b * x0c)
    for k in range(kmax + 1):
        x = x0 - k
        on = x >= 0
        if not on.any():
            break
        # e^{-cP(t-k)} (e^{bx} poly_k(bx) - 1) with the exponentials factored out
        y = b * x
        term = np.ones_like(y)
        poly = np.ones_like(y)
        for l in range(1, k + 1):
            term = term * (-y) / l
            poly = poly + term
        val = decay * math.exp(p.c * P * k) * (grow * math.exp(-b * k) * poly - 1.0)
        out += np.where(on, P / b ** (k + 1) * val, 0.0)
    return out


def eval_m(tau: ArrayLike, tau1: ArrayLike, tau2: ArrayLike, params: KernelParams | None = None) -> ArrayLike:
    """Response to the source -1 on [tau1, tau2] written in rescaled form.

    m(tau) = P int_{tau1}^{tau2} g(tau - s) e^{-c P s} ds.
    The window ends broadcast against tau.
    """
    if np.any(np.asarray(tau1) > np.asarray(tau2)):
        raise DomainError("eval_m needs tau1 <= tau2")
    p = _params(params)
    t = np.asarray(tau, dtype=float)
    scalar = t.ndim == 0 and np.ndim(tau1) == 0 and np.ndim(tau2) == 0
    t = np.atleast_1d(t)
    out = _m0(t, tau1, p) - _m0(t, tau2, p)
    return _out(out.flat[0], True) if scalar else out


def eval_G(phi: ArrayLike, params: KernelParams | None = None) -> ArrayLike:
    p = _params(params)
    phi = np.asarray(phi, dtype=float)
    val = np.asarray(eval_g(phi / p.period, p)) * np.exp(p.c * np.where(phi >= 0, phi, 0.0))
    return float(val) if val.ndim == 0 else val


def eval_M(phi: ArrayLike, phi1: float, phi2: float, params: KernelParams | None = None) -> ArrayLike:
    """M(phi, phi1, phi2) = int_{phi1}^{phi2} G(phi - s) ds."""
    p = _params(params)
    phi = np.asarray(phi, dtype=float)
    P = p.period
    val = np.asarray(eval_m(phi / P, phi1 / P, phi2 / P, p)) * np.exp(p.c * phi)
    return float(val) if val.ndim == 0 else val


def _require_critical(p: KernelParams) -> None:
    if not p.is_critical(1e-9):
        raise DomainError("primitives are defined at the critical angle only")


def _series_calG(x: np.ndarray, p: KernelParams) -> np.ndarray:
    # x = cot * (phi - P k); sum_k cos^{-(k+1)} [e^x sum_{j<=k} (-x)^j/j! - 1]
    P, cot, cos = p.period, p.cot, math.cos(p.alpha)
    out = np.zeros_like(x)
    if x.size == 0 or np.nanmax(x) < 0:
        return out
    kmax = int(math.floor(np.nanmax(x) / P))
    for k in range(kmax + 1):
        s = x - P * k
        on = s >= 0
        if not on.any():
            break
        out[on] += _exp_poly_tail(cot * s[on], k) / cos ** (k + 1)
    return out


def _series_frakG(x: np.ndarray, p: KernelParams) -> np.ndarray:
    P, cot, cos = p.period, p.cot, math.cos(p.alpha)
    out = np.zeros_like(x)
    if x.size == 0 or np.nanmax(x) < 0:
        return out
    kmax = int(math.floor(np.nanmax(x) / P))
    for k in range(kmax + 1):
        s = x - P * k
        on = s >= 0
        if not on.any():
            break
        sk = s[on]
        inner = np.zeros_like(sk)
        for j in range(k + 1):
            inner += _exp_poly_tail(cot * sk, j) / cot
        out[on] += (inner - sk) / cos ** (k + 1)
    return out


def eval_primitives(x: ArrayLike, which: str, params: KernelParams | None = None) -> ArrayLike:
    """Primitives of the kernel at the critical angle.

    which = "calG": calG(phi) = int_0^phi G / sin(alpha), argument phi.
    which = "gfrak": the same function read in tau, gfrak(tau) = calG(P tau).
    which = "frakG": frakG(phi) = int_0^phi calG, argument phi.
    """
    p = _params(params)
    _require_critical(p)
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if which == "calG":
        out = _series_calG(arr, p)
    elif which == "gfrak":
        out = _series_calG(arr * p.period, p)
    elif which == "frakG":
        out = _series_frakG(arr, p)
    else:
        raise DomainError(f"unknown primitive {which!r}")
    return _out(out[0], True) if scalar else out


def length_g(tau: ArrayLike, params: KernelParams | None = None) -> ArrayLike:
    """calG evaluated at phi = P tau."""
    return eval_primitives(tau, "gfrak", params)


def length2_g(tau: ArrayLike, params: KernelParams | None = None) -> ArrayLike:
    """frakG evaluated at phi = P tau."""
    p = _params(params)
    return eval_primitives(np.asarray(tau, dtype=float) * p.period, "frakG", p)


def length_m(tau: ArrayLike, tau1: float, tau2: float, params: KernelParams | None = None) -> ArrayLike:
    """int_0^phi M / sin(alpha) for the source on [P tau1, P tau2]."""
    t = np.asarray(tau, dtype=float)
    return length2_g(t - tau1, params) - length2_g(t - tau2, params)


def asymptote_g(tau: ArrayLike) -> ArrayLike:
    """Affine asymptote 2 tau + 2/3 of g at the critical angle."""
    return 2.0 * np.asarray(tau, dtype=float) + 2.0 / 3.0


def asymptote_m_coefficients(tau1: float, tau2: float, params: KernelParams | None = None) -> tuple[float, float]:
    """Slope and intercept of the affine asymptote of m(., tau1, tau2)."""
    p = _params(params)
    _require_critical(p)
    c, P = p.c, p.period
    slope = 2.0 * (math.exp(-c * P * tau1) - math.exp(-c * P * tau2)) / c

    def prim(s: float) -> float:
        e = math.exp(-c * P * s)
        return 2.0 * e / (c * c * P) + (2.0 * s - 2.0 / 3.0) * e / c

    return slope, prim(tau2) - prim(tau1)


def asymptote(which: str, *args, params: KernelParams | None = None) -> ArrayLike:
    """asymptote("g", tau) or asymptote("m", tau, tau1, tau2)."""
    if which == "g":
        (tau,) = args
        return asymptote_g(tau)
    if which == "m":
        tau, tau1, tau2 = args
        slope, const = asymptote_m_coefficients(tau1, tau2, params)
        return slope * np.asarray(tau, dtype=float) + const
    raise DomainError(f"unknown kernel {which!r}")


def heaviside(x: ArrayLike) -> ArrayLike:
    return np.where(np.asarray(x) >= 0, 1.0, 0.0)
