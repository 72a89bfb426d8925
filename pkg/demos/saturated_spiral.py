"""The saturated spiral at, below and above the critical angle."""
import math

import numpy as np

from artifact.fastest_saturated import crit
from artifact.spiral_rde import PiecewiseCurve, first_zero, saturated_ray, saturated_source, solve_rde_steps

A = crit().alpha
for alpha in (A - 0.01, A, A + 0.1):
    P = 2 * math.pi + alpha
    phi = np.linspace(0, 12 * P, 120_001)
    r = saturated_ray(phi, alpha)
    zero = first_zero(phi, r)
    state = f"closes at phi = {zero:.4f}" if zero is not None else f"open after 12 rounds, r = {r[-1]:.4g}"
    print(f"alpha = {alpha:.6f}: {state}")

# the method-of-steps solver agrees with the kernel form
sol = solve_rde_steps(PiecewiseCurve.zero(), A, saturated_source(), 3 * crit().P, crit().P / 1024)
phi = np.linspace(0, 3 * crit().P, 7)
print("\n phi        solver        kernel form")
for p, a, b in zip(phi, sol(phi), saturated_ray(phi, A)):
    print(f"{p:6.3f}  {a:13.9f}  {b:13.9f}")
