"""
Surface zoo for mce.

Exact surfaces with analytic jets (lines, planes, cones, catenoid, helicoid,
Enneper, a sphere control) and the registry that builds them by name.
"""

from .registry import BUILDERS, SurfaceSpecError, ZooEntry, load_surface_spec, make_surface

__all__ = [
    "BUILDERS",
    "SurfaceSpecError",
    "ZooEntry",
    "load_surface_spec",
    "make_surface",
]
