"""Critical constants, eigenvalues and the first rounds of the kernel g."""
import numpy as np

from artifact.kernels import eval_g, eval_m
from artifact.perturbation import hat_theta
from artifact.spectral import complex_eigenvalues, critical_constants

c = critical_constants()
print(f"alpha_bar = {c.alpha_bar:.10f}")
print(f"sigma_bar = {c.sigma_bar:.10f}")
print(f"c_bar     = {c.c_bar:.10f}")
print(f"theta_hat = {hat_theta():.12f}")

es = complex_eigenvalues(1.0, 4)
print("real roots at a = 1:", es.real_roots)
for re, im in es.complex_roots:
    print(f"  complex root {re:+.6f} {im:+.6f}i")

tau = np.linspace(0, 5, 11)
print("\n tau      g(tau)      m(tau; 0.5, 1)")
for t, gv, mv in zip(tau, eval_g(tau), eval_m(tau, 0.5, 1.0)):
    print(f"{t:4.1f}  {gv:11.6f}  {mv:11.6f}")
