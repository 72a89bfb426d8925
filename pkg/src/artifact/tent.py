"""Tent closing: two segments meeting at angle theta_hat over a convex base.

The base curve between Q0 and Q2 enters only through its length L and the
two projections of Q2 - Q0, so every output is a linear function of
(r0, L, dq_theta, dq_perp).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .fastest_saturated import LENGTH_FACTOR, crit
from .perturbation import hat_theta


@dataclass(frozen=True)
class TentGeometry:
    r_hat_0: float
    L_hat: float
    dq_theta: float
    dq_perp: float
    ell_hat_0: float
    r_hat_2: float
    ell_hat_1: float

    @property
    def saturation_residual(self) -> float:
        """r2 + L - r0 - cos(alpha)(l0 + l1); zero for a saturated endpoint."""
        cos = crit().cos
        return self.r_hat_2 + self.L_hat - self.r_hat_0 - cos * (self.ell_hat_0 + self.ell_hat_1)


def _denominator() -> float:
    k = crit()
    return math.cos(k.alpha - hat_theta()) - k.cos


def tent_solve(r_hat_0: float, L_hat: float, dq_theta: float, dq_perp: float) -> TentGeometry:
    k = crit()
    th = hat_theta()
    ell0 = (dq_theta - L_hat + r_hat_0 * (1.0 - math.cos(th))) / _denominator()
    r2 = (r_hat_0 * math.sin(k.alpha + th) + ell0 * math.sin(th) - dq_perp) / k.sin
    ell1 = (r2 + L_hat - r_hat_0 - k.cos * ell0) / k.cos
    return TentGeometry(r_hat_0, L_hat, dq_theta, dq_perp, ell0, r2, ell1)


def base_projections(chord: complex) -> tuple[float, float]:
    """(dq_theta, dq_perp) of the chord Q2 - Q0 given as a complex number."""
    k = crit()
    th = hat_theta()
    along = chord * complex(math.cos(th), -math.sin(th))
    perp_dir = k.alpha + th - 0.5 * math.pi
    perp = chord * complex(math.cos(perp_dir), -math.sin(perp_dir))
    return along.real, perp.real


def k_tent() -> float:
    k = crit()
    th = hat_theta()
    return k.sin * (math.sin(k.alpha + th) - k.sin) / (math.cos(th) * (1.0 - k.sin))


def worst_case_ratio(phi_hat: float) -> float:
    """L/r0 at which a two-segment base with corner direction phi_hat becomes critical."""
    k = crit()
    th = hat_theta()
    return k.sin * (math.cos(phi_hat) - math.cos(th - phi_hat)) / (
        math.sin(k.alpha - phi_hat) * (1.0 - math.cos(th - phi_hat))
    )


def tent_admissible(L_hat: float, r_hat_0: float) -> bool:
    if r_hat_0 <= 0.0:
        raise ValueError("r_hat_0 must be positive")
    return L_hat / r_hat_0 <= k_tent()


def tent_reach_bound() -> tuple[float, float]:
    """Angle (and rounds) within which the length bound forces admissibility."""
    k = crit()
    th = hat_theta()
    lead = k.alpha + th - 0.5 * math.pi
    angle = lead + k.tan * math.log(LENGTH_FACTOR / (math.exp(k.cot * lead) / k_tent() - 1.0))
    return angle, angle / k.P


def point_base_ell0_factor() -> float:
    """ell_hat_0 / r_hat_0 when the base is a single point."""
    return (1.0 - math.cos(hat_theta())) / _denominator()


def point_base_excess() -> float:
    """(r_hat_2 - r_hat_0 e^{cot theta_hat}) / r_hat_0 for a point base."""
    k = crit()
    th = hat_theta()
    return (k.cos - math.cos(k.alpha + th)) / _denominator() - math.exp(k.cot * th)


def saturated_final_factor() -> float:
    """Weight of rho(tau - 1) in the final-value lower bound, rescaled."""
    k = crit()
    return point_base_ell0_factor() * math.exp(-k.c * k.P)


def final_value(r_hat_2: float, r_tilde_2: float, r_tilde_barphi: float, ell_hat_0: float) -> float:
    """Ray at the closing angle, compared with the saturated spiral from the tent start."""
    k = crit()
    return (r_hat_2 - r_tilde_2) * math.exp(k.cot * (k.P - hat_theta())) + r_tilde_barphi - ell_hat_0


def tent_final_lower_bound(rtilde_at_barphi: float, r_hat_0: float) -> float:
    """Lower bound on the closing ray, valid for a convex tent base."""
    return rtilde_at_barphi - point_base_ell0_factor() * r_hat_0
