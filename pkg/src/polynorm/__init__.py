"""Normals from interior points of convex polytopes in R^3.

The main entry points are :func:`build_hull` for constructing a polytope,
:func:`normals_from` for enumerating the normals from an interior point and
:func:`find_high_normal_point` for locating a point with many normals.
"""

__version__ = "0.1.0"

from .errors import (DegenerateGeometryError, GenericityError, NumericalAnomaly, OnSheetError,
                     ParseError, PointOutsideError, PolynormError, PreconditionError, RerouteError)
from .geom import Plane, Tolerance
from .polytope import (Polytope, acute_circuit, build_hull, cube, is_generic, perturb_generic,
                       random_sphere_hull, regular_tetrahedron, validate_genericity)
from .normals import NormalCount, NormalRecord, circuit_extrema, count_normals, normals_from
from .spherical import SphericalPolygon, classify_skew, minimal_bigon, vertex_figure
from .bifurcation import Sheet, build_sheets, trace_segment
from .binormal import Binormal, enumerate_binormals, width
from .search import (SearchResult, chebyshev_center, find_high_normal_point, trace_binormal,
                     trace_nice_ray)

__all__ = [
    "DegenerateGeometryError", "GenericityError", "NumericalAnomaly", "OnSheetError", "ParseError",
    "PointOutsideError", "PolynormError", "PreconditionError", "RerouteError",
    "Plane", "Tolerance",
    "Polytope", "acute_circuit", "build_hull", "cube", "is_generic", "perturb_generic",
    "random_sphere_hull", "regular_tetrahedron", "validate_genericity",
    "NormalCount", "NormalRecord", "circuit_extrema", "count_normals", "normals_from",
    "SphericalPolygon", "classify_skew", "minimal_bigon", "vertex_figure",
    "Sheet", "build_sheets", "trace_segment",
    "Binormal", "enumerate_binormals", "width",
    "SearchResult", "chebyshev_center", "find_high_normal_point", "trace_binormal", "trace_nice_ray",
]
