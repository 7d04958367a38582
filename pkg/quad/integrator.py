"""
Integrator Module for mce.

This module evaluates the two surface integrals everything else is built on:

    huisken_direct  Gaussian-weighted area of M about y0 at scale tau
    ball_volume     area of M inside the ambient ball B(y0, r)

Both pull back through the Gram area element and integrate chart by chart
with tensor Gauss-Legendre cells. Sums are reduced pairwise in a fixed cell
order, so a given spec always reproduces the same bits.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from config.quad_config import QuadSpec
from geom.chart import AmbientPoint, ImmersionChart, Submanifold
from geom.curvature import area_density
from quad.rules import CellBatch, pairwise_sum, tensor_rule
from verify.special import gamma_tail_fraction, half_integer_gamma

logger = logging.getLogger(__name__)

# Points evaluated per chart call
CHUNK_POINTS = 200_000
MAX_DEPTH = 40
# Fraction of the linearized distance range treated as uncertain when classifying cells
REACH_FACTOR = 0.3
MAX_TAIL_ATTEMPTS = 4

Integrand = Callable[[ImmersionChart, np.ndarray], np.ndarray]


class QuadratureError(RuntimeError):
    """Quadrature did not reach its target and the caller cannot continue."""


@dataclass(frozen=True)
class EntropyValue:
    """H_{y0,tau}(M) with its error bound and bracket [low, high]."""

    tau: float
    value: float
    error_bound: float
    converged: bool = True
    low: Optional[float] = None
    high: Optional[float] = None
    cells: int = 0

    def __post_init__(self):
        if self.low is None:
            object.__setattr__(self, "low", self.value - self.error_bound)
        if self.high is None:
            object.__setattr__(self, "high", self.value + self.error_bound)

    def to_dict(self) -> dict:
        return {
            "tau": self.tau,
            "value": self.value,
            "bound": self.error_bound,
            "bound_low": self.low,
            "bound_high": self.high,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class VolumeValue:
    """Vol(B(y0, r) ∩ M) with its error bound."""

    radius: float
    value: float
    bound: float
    converged: bool = True
    cells: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class _Sums:
    totals: np.ndarray
    error: float
    cells: int
    converged: bool


def _chunks(count: int, points_per_cell: int) -> Iterable[slice]:
    step = max(1, CHUNK_POINTS // max(1, points_per_cell))
    for start in range(0, count, step):
        yield slice(start, min(count, start + step))


def _integrate_cells(chart: ImmersionChart, cells: CellBatch, nodes: np.ndarray, weights: np.ndarray, integrand: Integrand) -> np.ndarray:
    """Per-cell integrals (k, channels) of a vector integrand."""
    parts = []
    for chunk in _chunks(len(cells), len(weights)):
        batch = CellBatch(cells.lo[chunk], cells.hi[chunk], cells.depth[chunk])
        points = batch.map_nodes(nodes)
        k, q, n = points.shape
        values = integrand(chart, points.reshape(k * q, n)).reshape(k, q, -1)
        parts.append(np.einsum("kqc,q->kc", values, weights) * batch.jacobian[:, None])
    return np.concatenate(parts) if parts else np.zeros((0, 1))


def _ordered_totals(cells: CellBatch, values: np.ndarray) -> np.ndarray:
    order = cells.ordering()
    return np.array([pairwise_sum(values[order, c]) for c in range(values.shape[1])])


def _adaptive(chart: ImmersionChart, cells: CellBatch, integrand: Integrand, spec: QuadSpec, budget: int) -> _Sums:
    """Refine cells whose order-8 vs order-12 discrepancy exceeds their share of eps·|total|.

    Channel 0 drives refinement; other channels ride along on the same cells.
    """
    if not len(cells):
        return _Sums(np.zeros(1), 0.0, 0, True)
    dim = cells.dim
    base_nodes, base_weights = tensor_rule("gl", spec.base_order, dim)
    check_nodes, check_weights = tensor_rule("gl", spec.check_order, dim)

    def evaluate(batch: CellBatch) -> Tuple[np.ndarray, np.ndarray]:
        low = _integrate_cells(chart, batch, base_nodes, base_weights, integrand)
        high = _integrate_cells(chart, batch, check_nodes, check_weights, integrand)
        return high, np.abs(high[:, 0] - low[:, 0])

    values, errors = evaluate(cells)
    used = len(cells)
    converged = False
    rounds = 0
    while True:
        total = float(np.sum(values[:, 0]))
        error = float(np.sum(errors))
        target = spec.eps * abs(total)
        if error <= target:
            converged = True
            break
        refine = (errors > target / len(cells)) & (cells.depth < MAX_DEPTH)
        if not np.any(refine):
            logger.debug(f"{chart.label}: depth cap reached with error {error:.3e} > {target:.3e}")
            break
        children_count = int(np.sum(refine)) * 2 ** dim
        if used + children_count > budget:
            logger.debug(f"{chart.label}: subdivision budget {budget} exhausted with error {error:.3e}")
            break
        children = cells.select(refine).split()
        child_values, child_errors = evaluate(children)
        keep = ~refine
        cells = CellBatch.concat(cells.select(keep), children)
        values = np.concatenate([values[keep], child_values])
        errors = np.concatenate([errors[keep], child_errors])
        used += children_count
        rounds += 1
        logger.debug(f"{chart.label}: round {rounds}, {len(cells)} cells, total {total:.17g}, error {error:.3e}")

    order = cells.ordering()
    return _Sums(_ordered_totals(cells, values), pairwise_sum(errors[order]), used, converged)


def _gaussian_integrand(y0: np.ndarray, tau: float, n: int) -> Integrand:
    norm = (4.0 * math.pi * tau) ** (-0.5 * n)

    def integrand(chart: ImmersionChart, u: np.ndarray) -> np.ndarray:
        jet = chart.jet(u, order=1)
        density = area_density(chart, u, jet.jacobian)
        d2 = np.sum((jet.value - y0) ** 2, axis=-1)
        return np.stack([norm * np.exp(-d2 / (4.0 * tau)) * density, density], axis=-1)

    return integrand


def _area_integrand(chart: ImmersionChart, u: np.ndarray) -> np.ndarray:
    jet = chart.jet(u, order=1)
    return area_density(chart, u, jet.jacobian)[:, None]


def huisken_direct(M: Submanifold, y0: AmbientPoint, tau: float, spec: QuadSpec) -> EntropyValue:
    """Gaussian-weighted area int_M (4 pi tau)^{-n/2} exp(-|x - y0|^2 / 4 tau) dmu.

    Unbounded axes are cut where |X| exceeds R = rho + |y0| with
    rho = c_tail * sqrt(4 tau ln(1/eps')). The part of M beyond rho is bounded
    by an area-growth estimate (twice the density ratio measured inside the cut)
    times the regularized upper incomplete gamma Gamma(n/2, rho^2/4tau)/Gamma(n/2).
    The cut widens until that tail falls below eps·value or attempts run out.

    Raises:
        ValueError: tau <= 0 or y0 of the wrong dimension.
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if y0.dim != M.ambient_dim:
        raise ValueError(f"Center has {y0.dim} coordinates, surface lives in R^{M.ambient_dim}")
    n = M.dim
    center = y0.array
    integrand = _gaussian_integrand(center, tau, n)
    truncated = any(not axis.bounded for chart in M.charts for axis in chart.axes)
    log_inv_eps = math.log(1.0 / spec.eps)

    for attempt in range(1, MAX_TAIL_ATTEMPTS + 1):
        rho = spec.c_tail * math.sqrt(4.0 * tau * log_inv_eps)
        radius = rho + y0.norm
        value, area, error, cells, converged = 0.0, 0.0, 0.0, 0, True
        for chart in M.charts:
            box = chart.parameter_box(radius)
            if box is None:
                continue
            sums = _adaptive(chart, CellBatch.grid(box, spec.cells_per_axis), integrand, spec, spec.max_subdivisions - cells)
            value += float(sums.totals[0])
            area += float(sums.totals[1]) if sums.totals.size > 1 else 0.0
            error += sums.error
            cells += sums.cells
            converged = converged and sums.converged

        tail = 0.0
        if truncated:
            omega = math.pi ** (0.5 * n) / half_integer_gamma(0.5 * n + 1.0)
            ratio_sup = 2.0 * area / (omega * rho ** n)
            tail = ratio_sup * float(gamma_tail_fraction(0.5 * n, rho * rho / (4.0 * tau)))
        target = spec.eps * abs(value)
        if tail <= target:
            break
        logger.debug(f"huisken_direct: tail {tail:.3e} > {target:.3e} at rho={rho:.6g}, widening cut")
        if attempt == MAX_TAIL_ATTEMPTS or target == 0.0:
            converged = False
            break
        log_inv_eps += math.log(tail / target) + 1.0

    if not converged:
        logger.warning(f"huisken_direct on {M.label} at tau={tau:g} did not converge (error {error:.3e}, tail {tail:.3e})")
    bound = error + tail
    return EntropyValue(tau, value, bound, converged, value - error, value + tail + error, cells)


def _distance_fields(chart: ImmersionChart, u: np.ndarray, center: np.ndarray):
    """|X(u) - y|, its parameter gradient and the area density at points u (P, n)."""
    jet = chart.jet(u, order=1)
    diff = jet.value - center
    dist = np.linalg.norm(diff, axis=-1)
    safe = np.where(dist > 0.0, dist, 1.0)
    grad = np.einsum("pki,pk->pi", jet.jacobian, diff) / safe[:, None]
    grad[dist == 0.0] = 0.0
    return dist, grad, area_density(chart, u, jet.jacobian)


def _classify(chart: ImmersionChart, cells: CellBatch, center: np.ndarray, r: float, order: int):
    """Split cells into inside / straddling / outside the ball and estimate their areas."""
    nodes, weights = tensor_rule("gl", order, cells.dim)
    inside = np.zeros(len(cells), dtype=bool)
    outside = np.zeros(len(cells), dtype=bool)
    area = np.zeros(len(cells))
    for chunk in _chunks(len(cells), len(weights)):
        batch = CellBatch(cells.lo[chunk], cells.hi[chunk], cells.depth[chunk])
        points = batch.map_nodes(nodes)
        k, q, n = points.shape
        dist, grad, density = _distance_fields(chart, points.reshape(k * q, n), center)
        phi = (dist - r).reshape(k, q)
        spread = np.abs(grad.reshape(k, q, n)) * batch.half_width[:, None, :]
        reach = REACH_FACTOR * np.max(np.sum(spread, axis=-1), axis=1)
        inside[chunk] = np.max(phi, axis=1) <= -reach
        outside[chunk] = np.min(phi, axis=1) >= reach
        area[chunk] = density.reshape(k, q) @ weights * batch.jacobian
    return inside, outside, area


def _ramp(x: np.ndarray, width: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        ramp = np.clip(x / width + 0.5, 0.0, 1.0)
    return np.where(width > 0.0, ramp, (x >= 0.0).astype(float))


def _trapezoid(x: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """CDF at x of the sum of centred uniforms with widths a >= b."""
    s = x + 0.5 * (a + b)
    with np.errstate(divide="ignore", invalid="ignore"):
        ab2 = 2.0 * a * b
        cdf = np.select(
            [s <= 0.0, s <= b, s <= a, s < a + b],
            [0.0, s * s / ab2, (s - 0.5 * b) / a, 1.0 - (a + b - s) ** 2 / ab2],
            1.0,
        )
    return np.where(b > 0.0, cdf, _ramp(x, a))


def _inside_fraction(phi: np.ndarray, widths: np.ndarray) -> np.ndarray:
    """Fraction of a sub-cell where the linearized phi is <= 0.

    widths (..., n) are the ranges |d phi/du_i| * h_i over the sub-cell. Exact for
    n = 1 and n = 2; for n >= 3 a ramp with the same variance.
    """
    x = -phi
    n = widths.shape[-1]
    if n == 1:
        return _ramp(x, widths[..., 0])
    if n == 2:
        a = np.maximum(widths[..., 0], widths[..., 1])
        b = np.minimum(widths[..., 0], widths[..., 1])
        return _trapezoid(x, a, b)
    return _ramp(x, np.sqrt(np.sum(widths * widths, axis=-1)))


def _subsampled_volume(chart: ImmersionChart, cells: CellBatch, center: np.ndarray, r: float, count: int) -> np.ndarray:
    """Per-cell clipped area from count^n midpoint sub-cells."""
    nodes, weights = tensor_rule("mid", count, cells.dim)
    out = np.zeros(len(cells))
    for chunk in _chunks(len(cells), len(weights)):
        batch = CellBatch(cells.lo[chunk], cells.hi[chunk], cells.depth[chunk])
        points = batch.map_nodes(nodes)
        k, q, n = points.shape
        dist, grad, density = _distance_fields(chart, points.reshape(k * q, n), center)
        sub_width = 2.0 * batch.half_width / count
        widths = np.abs(grad.reshape(k, q, n)) * sub_width[:, None, :]
        fraction = _inside_fraction((dist - r).reshape(k, q), widths)
        out[chunk] = (density.reshape(k, q) * fraction) @ weights * batch.jacobian
    return out


def ball_volume(M: Submanifold, y0: AmbientPoint, r: float, spec: QuadSpec) -> VolumeValue:
    """Area of {u : |X(u) - y0| <= r} summed over charts.

    Cells are classified against the sphere at Gauss nodes. Straddling cells
    are bisected up to clip_depth (or until the straddling layer's area drops
    below eps·estimate); the rest are clipped by linearized sub-sampling at
    subsamples^n and (subsamples/2)^n points and Richardson-combined, with
    |fine - coarse|/3 added to the bound. Interior cells integrate adaptively.

    Raises:
        ValueError: r <= 0 or y0 of the wrong dimension.
    """
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    if y0.dim != M.ambient_dim:
        raise ValueError(f"Center has {y0.dim} coordinates, surface lives in R^{M.ambient_dim}")
    center = y0.array
    value, bound, cells_used, converged = 0.0, 0.0, 0, True
    fine = spec.subsamples
    coarse = max(1, spec.subsamples // 2)

    for chart in M.charts:
        box = chart.parameter_box(r + y0.norm)
        if box is None:
            continue
        dim = chart.dim
        pending = CellBatch.grid(box, spec.cells_per_axis)
        cells_used += len(pending)
        inside_batches: List[CellBatch] = []
        inside_area = 0.0
        straddle = CellBatch.empty(dim)
        while len(pending):
            inside, outside, area = _classify(chart, pending, center, r, spec.check_order)
            inside_batches.append(pending.select(inside))
            inside_area += float(np.sum(area[inside]))
            straddle_mask = ~(inside | outside)
            straddle = pending.select(straddle_mask)
            layer = float(np.sum(area[straddle_mask]))
            if not len(straddle):
                break
            if straddle.depth[0] >= spec.clip_depth or layer <= spec.eps * (inside_area + layer):
                break
            if cells_used + len(straddle) * 2 ** dim > spec.max_subdivisions:
                logger.debug(f"{chart.label}: budget exhausted while clipping at r={r:g}")
                converged = False
                break
            pending = straddle.split()
            cells_used += len(pending)
            straddle = CellBatch.empty(dim)

        interior = CellBatch.concat(CellBatch.empty(dim), *inside_batches)
        sums = _adaptive(chart, interior, _area_integrand, spec, max(0, spec.max_subdivisions - cells_used) + len(interior))
        cells_used += max(0, sums.cells - len(interior))
        converged = converged and sums.converged
        value += float(sums.totals[0])
        bound += sums.error

        if len(straddle):
            fine_values = _subsampled_volume(chart, straddle, center, r, fine)
            coarse_values = _subsampled_volume(chart, straddle, center, r, coarse)
            order = straddle.ordering()
            value += pairwise_sum(((4.0 * fine_values - coarse_values) / 3.0)[order])
            bound += pairwise_sum((np.abs(fine_values - coarse_values) / 3.0)[order])
            logger.debug(f"{chart.label}: r={r:g}, {len(interior)} interior and {len(straddle)} clipped cells")

    if not converged:
        logger.warning(f"ball_volume on {M.label} at r={r:g} did not converge (bound {bound:.3e})")
    return VolumeValue(float(r), value, bound, converged, cells_used)


def parallel_map(fn: Callable, items: Sequence, workers: int = 1) -> list:
    """Map fn over items, threaded when workers > 1; results keep input order."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def huisken_scan(M: Submanifold, y0: AmbientPoint, taus: Sequence[float], spec: QuadSpec, workers: int = 1) -> List[EntropyValue]:
    """huisken_direct at every tau of a grid."""
    return parallel_map(lambda tau: huisken_direct(M, y0, float(tau), spec), taus, workers)
