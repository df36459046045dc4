"""Optimal triangulations for piecewise linear interpolation in L_p norms."""

from .constants import c_p_plus, cp_closed, d_unit_area, optimize_shape
from .errors import OptSplineError
from .fields import builtin_field, parse_expression, parse_field, parse_weight
from .geometry import Triangle, Triangulation, validate_triangulation
from .meshgen import build_mesh, uniform_mesh
from .norms import cell_error, global_error
from .quadform import QuadraticForm, optimal_triangle

__version__ = "0.1.0"

__all__ = [
    "OptSplineError", "QuadraticForm", "Triangle", "Triangulation", "build_mesh",
    "builtin_field", "c_p_plus", "cell_error", "cp_closed", "d_unit_area", "global_error",
    "optimal_triangle", "optimize_shape", "parse_expression", "parse_field", "parse_weight",
    "uniform_mesh", "validate_triangulation",
]
