"""Simulation, kinetic limit and diagram combinatorics for a quartic lattice chain."""

from .errors import (
    FixedPointFailed,
    FputKinError,
    IntegrationDiverged,
    InvalidParameter,
    NotAdmissible,
    PositivityLost,
    QuadratureFailed,
    SerializationError,
    StructuralError,
)
from .model import Grid, SimParams, build_grid, dispersion, interaction_coeff

__all__ = [
    "FixedPointFailed",
    "FputKinError",
    "Grid",
    "IntegrationDiverged",
    "InvalidParameter",
    "NotAdmissible",
    "PositivityLost",
    "QuadratureFailed",
    "SerializationError",
    "SimParams",
    "StructuralError",
    "build_grid",
    "dispersion",
    "interaction_coeff",
]
