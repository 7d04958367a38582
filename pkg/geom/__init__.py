"""
Geometry package for mce.

Charts with exact 2-jets, submanifolds built from them, and the pointwise
quantities (area element, mean curvature) used to certify minimality.
"""

from .chart import (
    AmbientPoint,
    Axis,
    ChartError,
    ChartJet,
    DegenerateChartError,
    ImmersionChart,
    Submanifold,
)
from .curvature import (
    MinimalityResult,
    check_minimality,
    gram_area_element,
    mean_curvature_vector,
)

__all__ = [
    "AmbientPoint",
    "Axis",
    "ChartError",
    "ChartJet",
    "DegenerateChartError",
    "ImmersionChart",
    "Submanifold",
    "MinimalityResult",
    "check_minimality",
    "gram_area_element",
    "mean_curvature_vector",
]
