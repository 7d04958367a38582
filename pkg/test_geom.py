#!/usr/bin/env python3
"""
Tests for the geometry layer: charts, area elements, mean curvature and the
minimality check.
"""

import logging
import math
import sys

import numpy as np
import pytest
from scipy.stats import qmc

from geom.chart import AmbientPoint, Axis, ChartError, ChartJet, DegenerateChartError, ImmersionChart, Submanifold
from geom.curvature import check_minimality, gram_area_element, lattice_points, mean_curvature_vector
from zoo.registry import make_surface
from zoo.surfaces import CatenoidChart, ConeChart, EnneperChart, GreatCircleArc, HelicoidChart, SphereChart

logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(levelname)s - %(message)s")
logger = logging.getLogger(__name__)

RNG = np.random.default_rng(7)


def test_axis_rejects_bad_bounds():
    with pytest.raises(ChartError):
        Axis(1.0, 0.0)
    with pytest.raises(ChartError):
        Axis(0.0, None, periodic=True)
    assert Axis(0.0, 1.0).bounded
    assert not Axis(0.0, None).bounded


def test_parameter_box_truncates_only_unbounded_axes():
    chart = CatenoidChart()
    box = chart.parameter_box(5.0)
    assert box[0].tolist() == [0.0, 2 * math.pi]
    assert box[1, 1] == pytest.approx(math.acosh(5.0))
    assert box[1, 0] == pytest.approx(-math.acosh(5.0))
    # The waist circle has radius 1, so smaller balls miss the catenoid
    assert chart.parameter_box(0.5) is None


def test_parameter_box_needs_radius_for_unbounded_chart():
    with pytest.raises(ChartError):
        HelicoidChart().parameter_box()


def test_submanifold_requires_consistent_dimensions():
    with pytest.raises(ChartError):
        Submanifold((CatenoidChart(), GreatCircleArc("arc", 3, (0, 1), 0.0, 1.0)), "mixed")
    with pytest.raises(ChartError):
        Submanifold((), "empty")


def test_ambient_point_parse():
    y = AmbientPoint.parse("0, 0.5, -1")
    assert y.coords == (0.0, 0.5, -1.0)
    assert y.dim == 3
    assert y.norm == pytest.approx(math.sqrt(1.25))
    assert AmbientPoint.origin(4).is_origin()
    with pytest.raises(ChartError):
        AmbientPoint.parse("1,x")
    with pytest.raises(ChartError):
        AmbientPoint.parse("1,2", ambient_dim=3)
    with pytest.raises(ChartError):
        AmbientPoint((math.inf, 0.0))


def test_catenoid_area_element_is_cosh_squared():
    u = np.column_stack([RNG.uniform(0, 2 * math.pi, 50), RNG.uniform(-3, 3, 50)])
    density = gram_area_element(CatenoidChart(), u)
    np.testing.assert_allclose(density, np.cosh(u[:, 1]) ** 2, rtol=1e-13)
    assert gram_area_element(CatenoidChart(), [1.0, 0.0]) == pytest.approx(1.0)


def test_plane_area_element_is_one():
    chart = make_surface("plane").surface.charts[0]
    u = RNG.uniform(-10, 10, (20, 2))
    np.testing.assert_allclose(gram_area_element(chart, u), 1.0, rtol=1e-15)


def test_degenerate_chart_raises_with_location():
    cone = ConeChart("cone", GreatCircleArc("link", 3, (0, 1), 0.0, 2 * math.pi))
    with pytest.raises(DegenerateChartError) as info:
        gram_area_element(cone, [0.0, 1.0])
    assert info.value.u == (0.0, 1.0)
    assert info.value.gram_det <= 1e-14


@pytest.mark.parametrize("chart", [CatenoidChart(), HelicoidChart(), EnneperChart()], ids=lambda c: c.label)
def test_classical_minimal_surfaces_have_zero_mean_curvature(chart):
    u = RNG.uniform(-2, 2, (200, 2))
    h = mean_curvature_vector(chart, u)
    assert h.shape == (200, 3)
    assert np.max(np.linalg.norm(h, axis=-1)) < 1e-10


def test_unit_sphere_mean_curvature_has_norm_two():
    chart = SphereChart()
    u = np.column_stack([RNG.uniform(0.2, 2.9, 100), RNG.uniform(0, 2 * math.pi, 100)])
    norms = np.linalg.norm(mean_curvature_vector(chart, u), axis=-1)
    np.testing.assert_allclose(norms, 2.0, rtol=1e-12)


def test_catenoid_jets_match_finite_differences():
    chart = CatenoidChart()
    h = 1e-6
    for u in RNG.uniform(-1.5, 1.5, (10, 2)):
        jet = chart.jet(u)
        for i in range(2):
            step = np.zeros(2)
            step[i] = h
            fd = (chart.jet(u + step).value - chart.jet(u - step).value) / (2 * h)
            np.testing.assert_allclose(jet.jacobian[:, i], fd, atol=1e-8)
            fd2 = (chart.jet(u + step).jacobian - chart.jet(u - step).jacobian) / (2 * h)
            np.testing.assert_allclose(jet.hessian[:, :, i], fd2, atol=1e-7)


EXPR_CATENOID = {"exprs": "cosh(v)*cos(u); cosh(v)*sin(u); v", "domain": [[0.0, 2 * math.pi], [None, None]], "periodic": [True, False]}

ZOO_CASES = [
    ("line", {}),
    ("k_lines", {"k": 3}),
    ("plane", {}),
    ("offset_plane", {"d": 2}),
    ("k_planes", {"k": 3}),
    ("cone_over_link", {"link_length": 3 * math.pi}),
    ("catenoid", {}),
    ("helicoid", {}),
    ("enneper", {}),
    ("sphere", {}),
    ("graph_uv", {}),
    ("expr", EXPR_CATENOID),
]


def zoo_charts(dim=None):
    for name, params in ZOO_CASES:
        for index, chart in enumerate(make_surface(name, params).surface.charts):
            if dim is None or chart.dim == dim:
                yield pytest.param(chart, id=f"{name}[{index}]")


def halton_points(chart, count: int = 200, window: float = 2.0) -> np.ndarray:
    """Scrambled Halton points inside the chart's sample box, kept off its edges."""
    box = chart.sample_box(window)
    unit = qmc.Halton(d=chart.dim, scramble=True, seed=5).random(count)
    return box[:, 0] + (0.05 + 0.9 * unit) * (box[:, 1] - box[:, 0])


class SwappedChart(ImmersionChart):
    """The same surface with the parameter order reversed."""

    def __init__(self, chart: ImmersionChart):
        super().__init__(f"swapped {chart.label}", chart.axes[::-1], chart.ambient_dim)
        self.inner = chart

    def jet(self, u: np.ndarray, order: int = 2) -> ChartJet:
        jet = self.inner.jet(np.asarray(u, dtype=float)[..., ::-1], order)
        hessian = None if jet.hessian is None else jet.hessian[..., ::-1, ::-1]
        return ChartJet(jet.value, jet.jacobian[..., ::-1], hessian)


@pytest.mark.parametrize("chart", zoo_charts())
def test_zoo_jets_match_finite_differences(chart):
    for u in halton_points(chart):
        jet = chart.jet(u)
        scale = max(1.0, float(np.max(np.abs(jet.jacobian))), float(np.max(np.abs(jet.hessian))))
        for i in range(chart.dim):
            step = np.zeros(chart.dim)
            step[i] = 1e-5 * max(1.0, abs(u[i]))
            ahead, behind = chart.jet(u + step), chart.jet(u - step)
            fd = (ahead.value - behind.value) / (2 * step[i])
            fd2 = (ahead.jacobian - behind.jacobian) / (2 * step[i])
            assert np.max(np.abs(jet.jacobian[:, i] - fd)) <= 1e-6 * scale, (chart.label, u, i)
            assert np.max(np.abs(jet.hessian[:, :, i] - fd2)) <= 1e-6 * scale, (chart.label, u, i)


@pytest.mark.parametrize("chart", zoo_charts())
def test_mean_curvature_is_normal(chart):
    u = halton_points(chart)
    jacobian = chart.jet(u, order=1).jacobian
    h = mean_curvature_vector(chart, u)
    tangential = np.einsum("pki,pk->pi", jacobian, h)
    scale = 1.0 + np.max(np.abs(jacobian), axis=(1, 2)) ** 2 * (1.0 + np.linalg.norm(h, axis=-1))
    assert np.all(np.max(np.abs(tangential), axis=-1) <= 1e-9 * scale)


@pytest.mark.parametrize("chart", zoo_charts(dim=2))
def test_area_and_mean_curvature_ignore_parameter_order(chart):
    u = halton_points(chart)
    swapped = SwappedChart(chart)
    np.testing.assert_allclose(gram_area_element(swapped, u[:, ::-1]), gram_area_element(chart, u), rtol=1e-12)
    expected = mean_curvature_vector(chart, u)
    scale = 1.0 + float(np.max(np.abs(expected)))
    np.testing.assert_allclose(mean_curvature_vector(swapped, u[:, ::-1]), expected, rtol=0, atol=1e-12 * scale)


def test_check_minimality_passes_on_catenoid_and_fails_on_sphere():
    catenoid = check_minimality(make_surface("catenoid").surface, sample_count=500)
    assert catenoid.passed
    assert catenoid.max_norm < 1e-8

    sphere = check_minimality(make_surface("sphere").surface, sample_count=500)
    assert not sphere.passed
    assert sphere.max_norm == pytest.approx(2.0, rel=1e-9)
    assert sphere.worst_chart == "sphere"


def test_check_minimality_is_deterministic_and_seeded():
    surface = make_surface("graph_uv").surface
    first = check_minimality(surface, sample_count=200, seed=3)
    second = check_minimality(surface, sample_count=200, seed=3)
    assert first == second
    assert not first.passed

    chart = surface.charts[0]
    a = lattice_points(chart, 0, 50, 4.0, seed=3)
    b = lattice_points(chart, 0, 50, 4.0, seed=4)
    np.testing.assert_array_equal(a, lattice_points(chart, 0, 50, 4.0, seed=3))
    assert not np.array_equal(a, b)
    assert np.all(np.abs(a) <= 4.0)


def test_check_minimality_rejects_empty_sample():
    with pytest.raises(ValueError):
        check_minimality(make_surface("plane").surface, sample_count=0)


if __name__ == "__main__":
    logger.info("Running geometry tests")
    sys.exit(pytest.main([__file__, "-v"]))
