#!/usr/bin/env python3
"""
Tests for the quadrature layer: rules, cell batches, the direct Gaussian-weighted
functional and clipped ball volumes.
"""

import logging
import math
import sys

import numpy as np
import pytest
from scipy.optimize import brentq

from config.quad_config import QuadSpec
from config.run_config import parse_grid
from geom.chart import AmbientPoint
from quad import CellBatch, ball_volume, gauss_legendre, huisken_direct, huisken_scan, pairwise_sum, tensor_rule
from verify.checks import check_cone_invariance
from zoo.registry import make_surface

logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(levelname)s - %(message)s")
logger = logging.getLogger(__name__)


def test_gauss_legendre_is_exact_to_degree_2k_minus_1():
    nodes, weights = gauss_legendre(8)
    assert float(np.sum(weights * nodes ** 14)) == pytest.approx(2.0 / 15.0, rel=1e-14)
    assert float(np.sum(weights * nodes ** 15)) == pytest.approx(0.0, abs=1e-15)
    assert not nodes.flags.writeable


def test_tensor_rule_shapes_and_mass():
    nodes, weights = tensor_rule("gl", 4, 3)
    assert nodes.shape == (64, 3)
    assert float(np.sum(weights)) == pytest.approx(8.0)
    mid_nodes, mid_weights = tensor_rule("mid", 5, 2)
    assert mid_nodes.shape == (25, 2)
    assert float(np.sum(mid_weights)) == pytest.approx(4.0)


def test_pairwise_sum_uses_fixed_tree():
    values = np.array([1e16, 1.0, -1e16, 1.0, 3.0])
    assert pairwise_sum(values) == pairwise_sum(values.copy())
    assert pairwise_sum(np.arange(10.0)) == 45.0
    assert pairwise_sum(np.zeros(0)) == 0.0


def test_cell_batch_grid_split_and_ordering():
    cells = CellBatch.grid(np.array([[0.0, 2.0], [-1.0, 1.0]]), 2)
    assert len(cells) == 4
    np.testing.assert_allclose(cells.jacobian, 0.25)
    children = cells.split()
    assert len(children) == 16
    assert np.all(children.depth == 1)
    assert float(np.sum(np.prod(children.hi - children.lo, axis=1))) == pytest.approx(4.0)
    order = children.ordering()
    lo = children.lo[order]
    keys = [tuple(row) for row in lo]
    assert keys == sorted(keys)
    merged = CellBatch.concat(CellBatch.empty(2), cells, children)
    assert len(merged) == 20
    assert len(CellBatch.concat(CellBatch.empty(2), CellBatch.empty(2))) == 0


@pytest.mark.parametrize("tau", [0.1, 1.0, 100.0])
def test_huisken_direct_on_plane_is_one(spec, origin3, tau):
    h = huisken_direct(make_surface("plane").surface, origin3, tau, spec)
    assert h.converged
    assert h.value == pytest.approx(1.0, rel=1e-8)
    assert h.low <= 1.0 + 1e-12 and h.high >= 1.0 - 1e-12


def test_huisken_direct_matches_offset_plane_closed_form(spec, origin3):
    entry = make_surface("offset_plane", {"d": 2})
    h = huisken_direct(entry.surface, origin3, 1.0, spec)
    assert h.converged
    assert h.value == pytest.approx(entry.closed_form_entropy(1.0), rel=1e-8)


def test_huisken_direct_off_center_and_in_one_dimension(spec):
    lines = make_surface("k_lines", {"k": 2}).surface
    h = huisken_direct(lines, AmbientPoint.origin(2), 3.0, spec)
    assert h.value == pytest.approx(2.0, rel=1e-8)
    # Centering at distance 1 from the plane reproduces the offset closed form
    plane = make_surface("plane").surface
    shifted = huisken_direct(plane, AmbientPoint((5.0, -3.0, 1.0)), 2.0, spec)
    assert shifted.value == pytest.approx(math.exp(-1.0 / 8.0), rel=1e-8)


@pytest.mark.slow
def test_huisken_direct_catenoid_lies_between_one_and_two(spec, origin3):
    h = huisken_direct(make_surface("catenoid").surface, origin3, 1000.0, spec)
    assert h.converged
    assert 1.0 < h.value < 2.0


def test_huisken_direct_rejects_bad_input(spec, origin3):
    plane = make_surface("plane").surface
    with pytest.raises(ValueError):
        huisken_direct(plane, origin3, 0.0, spec)
    with pytest.raises(ValueError):
        huisken_direct(plane, AmbientPoint.origin(2), 1.0, spec)


def catenoid_ball_area(r: float) -> float:
    v = brentq(lambda x: math.cosh(x) ** 2 + x * x - r * r, 0.0, r)
    return 2.0 * math.pi * (v + 0.5 * math.sinh(2.0 * v))


@pytest.mark.parametrize(
    "name, params, r, exact",
    [
        ("plane", {}, 2.0, 4.0 * math.pi),
        ("k_planes", {"k": 3}, 1.5, 3.0 * math.pi * 2.25),
        ("line", {}, 3.0, 6.0),
        ("offset_plane", {"d": 1}, 2.0, 3.0 * math.pi),
        ("offset_plane", {"d": 1}, 0.5, 0.0),
        ("cone_over_link", {"link_length": 3 * math.pi}, 2.0, 1.5 * math.pi * 4.0),
        ("sphere", {}, 1.0, math.pi),
        ("sphere", {}, 2.5, 4.0 * math.pi),
    ],
)
def test_ball_volume_exact_cases(spec, name, params, r, exact):
    entry = make_surface(name, params)
    y0 = AmbientPoint.origin(entry.surface.ambient_dim)
    vol = ball_volume(entry.surface, y0, r, spec)
    assert vol.converged
    assert abs(vol.value - exact) <= vol.bound + 1e-7 * max(exact, 1.0)


def test_ball_volume_on_catenoid_matches_oracle(spec, origin3):
    vol = ball_volume(make_surface("catenoid").surface, origin3, 5.0, spec)
    exact = catenoid_ball_area(5.0)
    assert vol.converged
    assert vol.bound > 0.0
    assert abs(vol.value - exact) <= vol.bound + 1e-7 * exact
    assert ball_volume(make_surface("catenoid").surface, origin3, 0.9, spec).value == 0.0


def test_ball_volume_is_bitwise_reproducible(spec, origin3):
    surface = make_surface("enneper").surface
    first = ball_volume(surface, origin3, 3.0, spec)
    second = ball_volume(surface, origin3, 3.0, spec)
    assert first == second


def test_ball_volume_reports_exhausted_budget(origin3):
    tight = QuadSpec(max_subdivisions=64)
    vol = ball_volume(make_surface("helicoid").surface, origin3, 5.0, tight)
    assert not vol.converged


def test_ball_volume_rejects_bad_input(spec, origin3):
    with pytest.raises(ValueError):
        ball_volume(make_surface("plane").surface, origin3, 0.0, spec)
    with pytest.raises(ValueError):
        ball_volume(make_surface("plane").surface, AmbientPoint.origin(4), 1.0, spec)


def test_huisken_scan_is_independent_of_worker_count(spec, origin3):
    surface = make_surface("offset_plane", {"d": 1}).surface
    taus = [0.5, 2.0, 8.0]
    serial = huisken_scan(surface, origin3, taus, spec, workers=1)
    threaded = huisken_scan(surface, origin3, taus, spec, workers=3)
    assert serial == threaded
    assert [h.tau for h in serial] == taus


def test_ball_volume_is_nondecreasing_in_r(spec, origin3):
    surface = make_surface("catenoid").surface
    vols = [ball_volume(surface, origin3, r, spec) for r in (0.5, 1.2, 1.5, 2.0, 3.0, 4.0, 5.0)]
    assert all(v.converged for v in vols)
    for a, b in zip(vols[:-1], vols[1:]):
        assert b.value >= a.value - (a.bound + b.bound)
    assert vols[0].value == 0.0 and vols[1].value > 0.0


@pytest.mark.parametrize("name, params", [("offset_plane", {"d": 1}), ("k_lines", {"k": 3})])
def test_huisken_direct_is_nondecreasing_in_tau_on_flat_surfaces(spec, name, params):
    entry = make_surface(name, params)
    # Off the vertex so the k_lines scan is not constant
    y0 = AmbientPoint.origin(entry.surface.ambient_dim) if name == "offset_plane" else AmbientPoint((0.7, 0.2))
    values = huisken_scan(entry.surface, y0, parse_grid("log:0.1:1000:6"), spec)
    assert all(h.converged for h in values)
    for a, b in zip(values[:-1], values[1:]):
        assert b.high >= a.low
    assert values[-1].value > values[0].value + 1e-3


@pytest.mark.slow
def test_huisken_direct_is_nondecreasing_in_tau_on_catenoid(spec, origin3):
    values = huisken_scan(make_surface("catenoid").surface, origin3, parse_grid("log:0.1:100:4"), spec)
    for a, b in zip(values[:-1], values[1:]):
        assert b.high >= a.low


@pytest.mark.parametrize("scale", [2.0, 10.0])
def test_huisken_direct_scale_covariance_on_cones(spec, origin3, scale):
    # Cones are dilation invariant, so H_{s y0, s^2 tau}(C) = H_{y0, tau}(C)
    cone = make_surface("cone_over_link", {"link_length": 3 * math.pi}).surface
    at_vertex = huisken_direct(cone, origin3, 1.0, spec)
    scaled = huisken_direct(cone, origin3, scale ** 2, spec)
    assert scaled.value == pytest.approx(at_vertex.value, rel=1e-8)

    planes = make_surface("k_planes", {"k": 3}).surface
    y0 = AmbientPoint((0.3, -0.1, 0.2))
    off_vertex = huisken_direct(planes, y0, 0.5, spec)
    scaled = huisken_direct(planes, AmbientPoint(tuple(scale * c for c in y0.coords)), 0.5 * scale ** 2, spec)
    assert abs(scaled.value - off_vertex.value) <= scaled.error_bound + off_vertex.error_bound + 1e-8 * off_vertex.value


def assert_constant_on_grid(entry, spec):
    taus = parse_grid("log:0.1:100000:25")
    values = huisken_scan(entry.surface, AmbientPoint.origin(entry.surface.ambient_dim), taus, spec)
    assert all(h.converged for h in values)
    record = check_cone_invariance(values, True)
    assert record.passed, record.detail
    for h in values:
        assert abs(h.value - entry.eavr) <= h.error_bound + 1e-8 * entry.eavr


@pytest.mark.parametrize("k", [1, 2, 3])
def test_unions_of_planes_have_constant_entropy(spec, k):
    assert_constant_on_grid(make_surface("k_planes", {"k": k}), spec)


@pytest.mark.slow
@pytest.mark.parametrize("length", [3 * math.pi, 5 * math.pi])
def test_cones_over_links_have_constant_entropy(spec, length):
    entry = make_surface("cone_over_link", {"link_length": length})
    assert entry.eavr == pytest.approx(length / (2 * math.pi))
    assert_constant_on_grid(entry, spec)


if __name__ == "__main__":
    logger.info("Running quadrature tests")
    sys.exit(pytest.main([__file__, "-v"]))
