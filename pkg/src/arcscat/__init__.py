"""Weighted, regularized boundary integral solvers for thermoelastic scattering by open arcs."""

from .bvp import IncidentField, gmres, near_field, near_field_error, solve_bvp
from .errors import ConfluentWavenumbersError, NumericalError
from .geometry import make_arc, make_custom_arc
from .medium import MediumParams, compute_wavenumbers, regularization_constants, spectral_constants
from .operators import DiscreteOperator, assemble_regularized, assemble_v1w, compose
from .quadrature import ChebyshevGrid

__all__ = [
    "ChebyshevGrid",
    "ConfluentWavenumbersError",
    "DiscreteOperator",
    "IncidentField",
    "MediumParams",
    "NumericalError",
    "assemble_regularized",
    "assemble_v1w",
    "compose",
    "compute_wavenumbers",
    "gmres",
    "make_arc",
    "make_custom_arc",
    "near_field",
    "near_field_error",
    "regularization_constants",
    "solve_bvp",
    "spectral_constants",
]
