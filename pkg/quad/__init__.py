"""
Quadrature package for mce.

Adaptive tensor Gauss-Legendre integration over chart cells: the direct
Gaussian-weighted functional and clipped ball volumes, each with an error bound.
"""

from config.quad_config import QuadSpec

from .integrator import (
    EntropyValue,
    QuadratureError,
    VolumeValue,
    ball_volume,
    huisken_direct,
    huisken_scan,
    parallel_map,
)
from .rules import CellBatch, gauss_legendre, pairwise_sum, tensor_rule

__all__ = [
    "QuadSpec",
    "EntropyValue",
    "QuadratureError",
    "VolumeValue",
    "ball_volume",
    "huisken_direct",
    "huisken_scan",
    "parallel_map",
    "CellBatch",
    "gauss_legendre",
    "pairwise_sum",
    "tensor_rule",
]
