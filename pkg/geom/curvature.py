"""
Pointwise differential geometry of charts: Gram area element, mean curvature
vector and a deterministic minimality check.

Mean curvature follows the trace convention H = g^{ij} (d2X/du_i du_j)^perp,
so the unit sphere in R^3 has |H| = 2.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.stats import qmc

from geom.chart import GRAM_TOLERANCE, DegenerateChartError, ImmersionChart, Submanifold

logger = logging.getLogger(__name__)

# Points per batch when sampling charts for minimality
SAMPLE_CHUNK = 4096


def metric_tensor(jacobian: np.ndarray) -> np.ndarray:
    """First fundamental form g = DX^T DX for a batch of Jacobians (..., N, n)."""
    return np.einsum("...ki,...kj->...ij", jacobian, jacobian)


def checked_metric(chart: ImmersionChart, u: np.ndarray, jacobian: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Metric and its determinant, raising on the first rank-deficient point."""
    g = metric_tensor(jacobian)
    det = np.linalg.det(g)
    bad = ~(det > GRAM_TOLERANCE)
    if np.any(bad):
        k = int(np.argmax(np.ravel(bad)))
        points = np.asarray(u, dtype=float).reshape(-1, chart.dim)
        raise DegenerateChartError(chart.label, points[k], np.ravel(det)[k])
    return g, det


def area_density(chart: ImmersionChart, u: np.ndarray, jacobian: np.ndarray) -> np.ndarray:
    """sqrt(det g) for a batch whose Jacobians were already evaluated."""
    _, det = checked_metric(chart, u, jacobian)
    return np.sqrt(det)


def gram_area_element(chart: ImmersionChart, u):
    """n-dimensional area density sqrt(det(DX^T DX)) at u.

    Args:
        chart: Chart to evaluate.
        u: A parameter point (n,) or a batch (..., n).

    Returns:
        float for a single point, array for a batch.

    Raises:
        DegenerateChartError: If the Gram determinant is at or below 1e-14.
    """
    u = np.asarray(u, dtype=float)
    jet = chart.jet(u, order=1)
    density = area_density(chart, u, jet.jacobian)
    return float(density) if u.ndim == 1 else density


def mean_curvature_vector(chart: ImmersionChart, u) -> np.ndarray:
    """Trace of the second fundamental form at u, a vector in R^(n+m)."""
    u = np.asarray(u, dtype=float)
    jet = chart.jet(u, order=2)
    jacobian = jet.jacobian
    g, _ = checked_metric(chart, u, jacobian)
    g_inv = np.linalg.inv(g)
    laplacian = np.einsum("...ij,...kij->...k", g_inv, jet.hessian)
    # Remove the tangential part: DX g^-1 DX^T applied to the trace
    coeffs = np.einsum("...ij,...kj,...k->...i", g_inv, jacobian, laplacian)
    tangential = np.einsum("...ki,...i->...k", jacobian, coeffs)
    return laplacian - tangential


@dataclass(frozen=True)
class MinimalityResult:
    """Outcome of check_minimality."""

    passed: bool
    max_norm: float
    tol: float
    sample_count: int
    worst_chart: Optional[str] = None
    worst_u: Optional[Tuple[float, ...]] = None

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self):
        return {
            "passed": self.passed,
            "max_norm": self.max_norm,
            "tol": self.tol,
            "sample_count": self.sample_count,
            "worst_chart": self.worst_chart,
            "worst_u": list(self.worst_u) if self.worst_u is not None else None,
        }


def lattice_points(chart: ImmersionChart, chart_index: int, sample_count: int, window: float, seed: int = 0) -> np.ndarray:
    """Deterministic low-discrepancy parameter points for one chart.

    An unscrambled Halton sequence is offset by the chart index and seed, so
    the lattice is fixed for a given (index, seed) pair and never hits the
    box corner at the sequence start.
    """
    sampler = qmc.Halton(d=chart.dim, scramble=False)
    sampler.fast_forward(1 + int(seed) + 7919 * int(chart_index))
    unit = sampler.random(sample_count)
    box = chart.sample_box(window)
    return box[:, 0] + unit * (box[:, 1] - box[:, 0])


def check_minimality(
    surface: Submanifold,
    sample_count: int = 1000,
    tol: float = 1e-8,
    window: float = 4.0,
    seed: int = 0,
) -> MinimalityResult:
    """Sample every chart and compare the largest |H| against tol.

    Args:
        surface: Submanifold to check.
        sample_count: Points per chart, at least 1.
        tol: Pass threshold for max |H|.
        window: Half-width used to sample unbounded axes.
        seed: Offset into the low-discrepancy sequence.

    Returns:
        MinimalityResult with the maximum norm and where it occurred.
    """
    if sample_count < 1:
        raise ValueError(f"sample_count must be >= 1, got {sample_count}")

    max_norm = 0.0
    worst_chart = None
    worst_u = None
    for index, chart in enumerate(surface.charts):
        points = lattice_points(chart, index, sample_count, window, seed)
        for start in range(0, len(points), SAMPLE_CHUNK):
            chunk = points[start:start + SAMPLE_CHUNK]
            norms = np.linalg.norm(mean_curvature_vector(chart, chunk), axis=-1)
            k = int(np.argmax(norms))
            if worst_chart is None or norms[k] > max_norm:
                max_norm = float(norms[k])
                worst_chart = chart.label
                worst_u = tuple(float(x) for x in chunk[k])

    passed = max_norm < tol
    logger.info(
        f"Minimality of '{surface.label}': max |H| = {max_norm:.3e} over "
        f"{sample_count * len(surface.charts)} samples ({'pass' if passed else 'fail'})"
    )
    return MinimalityResult(passed, max_norm, tol, sample_count, worst_chart, worst_u)
