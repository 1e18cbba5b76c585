"""Generalized Fisher geometry of phi-families on finite sample spaces."""

from .errors import PhiGeomError
from .phi_core import PhiFunction, eval_bundle, validate_phi
from .sample_space import Density, FiniteSpace, TangentVector, expectation, semi_inner_product
from .phi_family import ManifoldPoint, PhiFamily, ReparametrizedFamily, point_at, solve_psi
from .geometry import (
    christoffel_alpha,
    christoffel_pm1,
    geodesic,
    levi_civita,
    metric,
    natural_gradient_step,
    riemann_curvature,
    skewness,
)
from .divergence import kl_divergence, phi_divergence
from .transport import recover_connection_1, transport_1, transport_ode
from .kernels import backend_name

__version__ = "0.1.0"
