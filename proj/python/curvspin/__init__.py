"""Spin-1/2 particle on a curved surface.

Thin wrapper around the C++ core. Energies are in hbar^2/(m L0^2), fields in
hbar/(e L0^2).
"""

from ._curvspin import (  # noqa: F401
    InvalidParameter,
    NotClosedSurface,
    Surface,
    analytic_force,
    conductance,
    cylinder_levels,
    field_tesla,
    flux,
    heff,
    pseudo_field,
    run,
    soi_radius,
)

__all__ = [
    "InvalidParameter",
    "NotClosedSurface",
    "Surface",
    "analytic_force",
    "conductance",
    "cylinder_levels",
    "field_tesla",
    "flux",
    "heff",
    "pseudo_field",
    "run",
    "soi_radius",
]
