# src/walklab/tube/__init__.py
"""Rotationally symmetric random tubes with piecewise-constant radius and exact chord tracing."""

from .ray import DegenerateRayError, WindowExhaustedError, chord_axial_length, ray_exit, visibility_roundtrip
from .tube import (
    LATERAL,
    STEP,
    BoundaryPoint,
    NonRegularPointError,
    Patch,
    RadiusProcess,
    Tube,
    TubeSpecError,
    band_measure,
    band_patches,
    boundary_residual,
    build_tube,
    embed,
    inner_normal,
    pi_measure,
    sample_boundary_uniform,
)

__all__ = [
    "DegenerateRayError",
    "WindowExhaustedError",
    "chord_axial_length",
    "ray_exit",
    "visibility_roundtrip",
    "LATERAL",
    "STEP",
    "BoundaryPoint",
    "NonRegularPointError",
    "Patch",
    "RadiusProcess",
    "Tube",
    "TubeSpecError",
    "band_measure",
    "band_patches",
    "boundary_residual",
    "build_tube",
    "embed",
    "inner_normal",
    "pi_measure",
    "sample_boundary_uniform",
]
