"""Fire spirals against a barrier at the critical angle.

Modules: spectral (critical constants, characteristic roots), kernels
(Green kernels of the retarded equation), spiral_rde (method-of-steps
solver and traces), fastest_saturated (the a-family of saturated spirals),
perturbation (segment and arc perturbations), tent (tent closing),
optimal_candidate (the candidate optimal strategy), verifier (grid-scan
cases) and cli.
"""
from .spectral import ConvergenceError, DomainError, critical_constants

__all__ = ["ConvergenceError", "DomainError", "critical_constants"]
__version__ = "0.1.0"
