"""Zeta-corrected trapezoidal quadrature for singular and hypersingular integrals.

Modules
-------
specfun    gamma-type special functions and Bell polynomials
epstein    Epstein zeta function of a binary quadratic form and its derivatives
wigner     Wigner limits of lattice sums and their brute-force oracle
momentfit  moment-fitting correction weights
geom       curves, tori and quartic patches
quad1d     1D hypersingular rules and the 2D hypersingular operator
quad3d     corrected layer potentials on parametric surfaces
bie        Laplace Dirichlet solvers in 2D and 3D
cli        command-line experiments
"""

from .epstein import Direction, QuadraticForm, epstein_mixed_derivatives, epstein_partial_derivatives, epstein_zeta
from .geom import make_curve, make_patch, make_torus
from .momentfit import WeightCache, build_correction_plan, solve_weights
from .quad1d import assemble_hypersingular_2d, central_diff_coeffs, fp_trapezoid_1d, fp_trapezoid_1d_alt
from .quad3d import layer_operator, make_operator_spec, precompute_corrections
from .wigner import Monomial, wigner_limit, wigner_oracle

__version__ = "0.1.0"

__all__ = [
    "Direction", "QuadraticForm", "epstein_zeta", "epstein_mixed_derivatives", "epstein_partial_derivatives",
    "make_curve", "make_patch", "make_torus",
    "WeightCache", "build_correction_plan", "solve_weights",
    "assemble_hypersingular_2d", "central_diff_coeffs", "fp_trapezoid_1d", "fp_trapezoid_1d_alt",
    "layer_operator", "make_operator_spec", "precompute_corrections",
    "Monomial", "wigner_limit", "wigner_oracle",
]
