"""Monte Carlo Crofton formulas on pseudo-Riemannian space forms."""

from .bodies import Band, Cap, ConeBody, Ellipse, Equator, FlatBall, Limacon, SpaceForm, SwappedBody
from .engine import CroftonEstimate, SweepResult, epsilon_sweep, estimate_flat, estimate_sphere
from .intrinsic_volumes import crofton_coeffs, mu1_curve_flat, mu_cap, template_limit
from .pseudo_linalg import QuadraticSpace, Signature, standard_form

__all__ = [
    "Band", "Cap", "ConeBody", "Ellipse", "Equator", "FlatBall", "Limacon", "SpaceForm", "SwappedBody",
    "CroftonEstimate", "SweepResult", "epsilon_sweep", "estimate_flat", "estimate_sphere",
    "crofton_coeffs", "mu1_curve_flat", "mu_cap", "template_limit",
    "QuadraticSpace", "Signature", "standard_form",
]
