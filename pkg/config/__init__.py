"""
Configuration package for mce: quadrature defaults and per-run settings.
"""

from .quad_config import QuadConfig, QuadSpec
from .run_config import ConfigError, RunConfig, parse_grid, parse_values

__all__ = ["QuadConfig", "QuadSpec", "ConfigError", "RunConfig", "parse_grid", "parse_values"]
