"""Problem description: equation grammar, spec files, validation and Newton polygon."""

from .grammar import OperatorSpec, format_equation, format_poly, parse_equation
from .polygon import NewtonPolygon, closed_form_inv_k, hull_chain, newton_polygon, polygon_from_data, slope_k
from .specfile import ProblemSpec, load_problem, parse_problem
from .validate import Finding, has_errors, validate_spec

__all__ = [
    "OperatorSpec",
    "parse_equation",
    "format_equation",
    "format_poly",
    "NewtonPolygon",
    "newton_polygon",
    "polygon_from_data",
    "hull_chain",
    "slope_k",
    "closed_form_inv_k",
    "ProblemSpec",
    "parse_problem",
    "load_problem",
    "Finding",
    "validate_spec",
    "has_errors",
]
