"""
mkpoly: Macdonald-Koornwinder polynomials by orthogonalisation on the torus,
and their rank-one reconstruction as spherical functions of the quantum
symmetric pair (U_q(gl(2)), B^sigma).
"""
from .koornwinder import SphericalLabels, ground_state_restriction, mk_family, mk_polynomial
from .rankone import spherical_restriction, verify_theorem_i_rank1, verify_theorem_iii_rank1
from .symlaurent import LaurentPoly, orbit_sum
from .torus_measure import MKParams, QuadratureGrid, TorusMeasure, auto_grid

__version__ = "0.1.0"

__all__ = [
    "LaurentPoly",
    "MKParams",
    "QuadratureGrid",
    "SphericalLabels",
    "TorusMeasure",
    "auto_grid",
    "ground_state_restriction",
    "mk_family",
    "mk_polynomial",
    "orbit_sum",
    "spherical_restriction",
    "verify_theorem_i_rank1",
    "verify_theorem_iii_rank1",
    "__version__",
]
