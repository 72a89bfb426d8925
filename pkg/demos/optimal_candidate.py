"""Optimal candidate against the fastest saturated spiral, range by range."""
from artifact.fastest_saturated import fastest_ray
from artifact.optimal_candidate import optimal_asymptotics, r_opt, range_boundaries

for name, phi in range_boundaries().items():
    print(f"{name:24s} {phi:.6f}")

print("\nphi_bar  range    r_opt        fastest      ratio")
for phi_bar in (6.0, 7.9, 9.0, 10.0, 12.0, 16.0, 24.0, 40.0):
    plan = r_opt(phi_bar)
    fast = float(fastest_ray(phi_bar, 0.0))
    print(f"{phi_bar:6.1f}  {plan.range_id:8s}{plan.r_opt:11.5f}  {fast:11.5f}  {plan.r_opt / fast:.6f}")

a = optimal_asymptotics()
print(f"\nlimit ratio {a.ratio:.6f} with K_asympt {a.K_asympt:.6f}")
