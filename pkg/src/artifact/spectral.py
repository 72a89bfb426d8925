"""Critical constants of the spiral RDE and its characteristic roots.

The rescaled delay equation reads rho'(t) = a rho(t) - rho(t - 1), whose
characteristic equation is lambda + exp(-lambda) = a.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

TWO_PI = 2.0 * math.pi
CRITICAL_WINDOW = 1e-9


class DomainError(ValueError):
    """Argument outside the domain where a formula is defined."""


class ConvergenceError(RuntimeError):
    """Root finder failed to bracket or converge."""


def _check_angle(alpha: float) -> None:
    if not (0.0 < alpha < 0.5 * math.pi):
        raise DomainError(f"alpha={alpha!r} must lie in (0, pi/2)")


def exponent_c(alpha: float) -> float:
    """Growth exponent c(alpha) = ln((2pi + alpha)/sin alpha)/(2pi + alpha)."""
    _check_angle(alpha)
    period = TWO_PI + alpha
    return math.log(period / math.sin(alpha)) / period


def coeff_a(alpha: float) -> float:
    """Coefficient a(alpha) = (2pi + alpha)(cot alpha - c(alpha))."""
    _check_angle(alpha)
    period = TWO_PI + alpha
    return period / math.tan(alpha) - math.log(period / math.sin(alpha))


@dataclass(frozen=True)
class CriticalConstants:
    alpha_bar: float
    sigma_bar: float
    c_bar: float
    a_of_alpha_bar: float

    @property
    def period(self) -> float:
        """One delay interval 2pi + alpha_bar in the angle variable."""
        return TWO_PI + self.alpha_bar


def critical_constants(tol: float = 1e-12) -> CriticalConstants:
    """Solve a(alpha) = 1 on (1.0, 1.3)."""
    if tol <= 0:
        raise DomainError("tol must be positive")
    return _critical_constants(float(tol))


@lru_cache(maxsize=8)
def _critical_constants(tol: float) -> CriticalConstants:
    try:
        alpha = brentq(lambda x: coeff_a(x) - 1.0, 1.0, 1.3, xtol=tol * 1e-3, rtol=4 * np.finfo(float).eps, maxiter=200)
    except RuntimeError as exc:
        raise ConvergenceError(str(exc)) from exc
    a_val = coeff_a(alpha)
    if abs(a_val - 1.0) > max(tol, 1e-14):
        raise ConvergenceError(f"|a(alpha_bar) - 1| = {abs(a_val - 1.0):.3e} > tol")
    # at the critical angle c = cot - 1/(2pi + alpha), since a = 1
    c_bar = 1.0 / math.tan(alpha) - 1.0 / (TWO_PI + alpha)
    return CriticalConstants(alpha, 1.0 / math.cos(alpha), c_bar, a_val)


def characteristic(lam: complex, a: float) -> complex:
    return lam + np.exp(-lam) - a


def real_eigenvalues(a: float, tol: float = 1e-12) -> list[float]:
    """Real roots of lambda + exp(-lambda) = a.

    The left side is convex with minimum 1 at lambda = 0, so there are two
    roots for a > 1, a double root at 0 for a = 1 and none below.
    A double root is reported twice.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    if abs(a - 1.0) < CRITICAL_WINDOW:
        return [0.0, 0.0]
    if a < 1.0:
        return []
    f = lambda x: x + math.exp(-x) - a
    # lambda+ < a and lambda- > -ln(a) - 1 is loose; expand until sign changes
    hi = a
    lo = -1.0
    while f(lo) <= 0:
        lo *= 2.0
    lam_minus = brentq(f, lo, 0.0, xtol=tol, rtol=4 * np.finfo(float).eps)
    lam_plus = brentq(f, 0.0, hi, xtol=tol, rtol=4 * np.finfo(float).eps)
    return [lam_minus, lam_plus]


@dataclass(frozen=True)
class EigenSet:
    a: float
    real_roots: list[float]
    complex_roots: list[tuple[float, float]] = field(default_factory=list)

    def as_complex(self) -> np.ndarray:
        return np.array([complex(x, y) for x, y in self.complex_roots])


def _imag_equation(y: float, a: float) -> float:
    # log of e^{y cot y} sin y / y = e^a, valid where sin y > 0
    return y / math.tan(y) + math.log(math.sin(y) / y) - a


def complex_eigenvalues(a: float, k_max: int, tol: float = 1e-12) -> EigenSet:
    """Complex roots x + iy, y in (2k pi, (2k+1) pi), k = 1..k_max.

    On the branch y cot y decreases from +inf to -inf, so each interval holds
    exactly one root.  The real part is x = ln(sin y / y).
    """
    if k_max < 1:
        raise DomainError("k_max must be >= 1")
    roots = []
    for k in range(1, k_max + 1):
        lo = 2 * k * math.pi + 1e-6
        hi = (2 * k + 1) * math.pi - 1e-6
        flo, fhi = _imag_equation(lo, a), _imag_equation(hi, a)
        if flo * fhi > 0:
            raise ConvergenceError(f"bracketing failed for k={k}")
        y = brentq(_imag_equation, lo, hi, args=(a,), xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)
        roots.append((math.log(math.sin(y) / y), y))
    return EigenSet(a, real_eigenvalues(a, tol) if a >= 1.0 - CRITICAL_WINDOW else [], roots)


def saturated_positivity_margin(alpha: float) -> float:
    """(e^{2pi cot} - 1) e^{-2pi cot + a} - e^{a 2pi/(2pi+alpha)}.

    Positive means the rescaled saturated spiral starts its second round
    above the first-round exponential trend.
    """
    cot = 1.0 / math.tan(alpha)
    a = coeff_a(alpha)
    return (math.exp(TWO_PI * cot) - 1.0) * math.exp(-TWO_PI * cot + a) - math.exp(a * TWO_PI / (TWO_PI + alpha))
