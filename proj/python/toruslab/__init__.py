"""Numerical laboratory for a persistently singular, robustly transitive torus endomorphism."""

from ._core import (
    DomainError,
    TorusMap,
    blender_map,
    default_params,
    density,
    fixed_points,
    linear_map,
    minimality,
    perturbation,
    perturbed_map,
    persistence,
    singular_map,
    validate_params,
    verify_cones,
)

__all__ = [
    "DomainError",
    "TorusMap",
    "blender_map",
    "default_params",
    "density",
    "fixed_points",
    "linear_map",
    "minimality",
    "perturbation",
    "perturbed_map",
    "persistence",
    "singular_map",
    "validate_params",
    "verify_cones",
]
