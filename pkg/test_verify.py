#!/usr/bin/env python3
"""
Tests for the individual checks and the full verification suite.
"""

import logging
import math
import sys

import numpy as np
import pytest

from config.run_config import parse_grid
from geom.chart import AmbientPoint
from quad.integrator import EntropyValue, huisken_direct
from radial.profile import EavrEstimate, RadialProfile, build_profile, eavr_estimate, entropy_curve, merge_breakpoints, unit_ball_volume
from verify.checks import (
    check_cone_invariance,
    check_density_monotonicity,
    check_entropy_bounds,
    check_entropy_monotonicity,
    check_normalization_identity,
    check_shell_sandwich,
    check_shell_sandwich_lower,
    check_shell_sandwich_upper,
    check_theorem,
    entropy_lower_bound,
)
from verify.suite import SuiteGrids, SuiteSettings, run_suite
from zoo.registry import make_surface

logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(levelname)s - %(message)s")
logger = logging.getLogger(__name__)

SMALL_SETTINGS = SuiteSettings(minimality_samples=200)


def test_normalization_identity_check():
    record = check_normalization_identity()
    assert record.passed and record.applicable
    assert record.grid["n"] == list(range(1, 11))


def test_checks_pass_on_exact_cone(make_cone_profile):
    p = make_cone_profile(2.5, parse_grid("log:0.5:50:12"))
    taus = parse_grid("log:0.1:1000:6")
    eavr = eavr_estimate(p)
    curve = entropy_curve(p, taus, eavr=eavr)
    assert check_density_monotonicity(p).passed
    assert check_shell_sandwich_lower(p).passed
    assert check_shell_sandwich_upper(p, eavr).passed
    assert check_entropy_bounds(p, curve).passed
    assert check_entropy_monotonicity(curve).passed
    assert check_cone_invariance(curve, True).passed
    assert check_theorem(eavr, curve).passed


def test_combined_shell_sandwich(make_cone_profile):
    cone = make_cone_profile(1.5, parse_grid("log:1:20:6"))
    record = check_shell_sandwich(cone)
    assert record.passed and not record.advisory
    assert record.detail.startswith("lower: ")
    assert not check_shell_sandwich(make_cone_profile(1.0, [1.0, 2.0])).applicable

    radii = np.array([1.0, 2.0, 3.0, 4.0])
    dropping = RadialProfile(AmbientPoint.origin(3), radii, math.pi * np.array([1.0, 4.0, 4.5, 5.0]), np.zeros(4), 2)
    assert not check_shell_sandwich(dropping, EavrEstimate(1.0, 1.0, 1.0, True)).passed


def test_density_check_catches_a_drop():
    radii = np.array([1.0, 2.0, 3.0])
    values = math.pi * np.array([1.0, 4.0, 4.0])
    p = RadialProfile(AmbientPoint.origin(3), radii, values, np.zeros(3), 2, "capped")
    record = check_density_monotonicity(p)
    assert not record.passed
    assert record.worst_margin < 0
    assert "(1.0, 3.0)" in record.detail or "(2.0, 3.0)" in record.detail


def test_entropy_lower_bound_is_below_plane_entropy(make_cone_profile):
    p = make_cone_profile(1.0, [0.5, 1.0, 2.0, 4.0])
    for tau in (0.1, 1.0, 10.0):
        bounds = entropy_lower_bound(p, tau)
        assert np.all(bounds <= 1.0 + 1e-14)
        # (1 + eta) e^{-eta} at eta = r^2/4tau
        eta = p.radii ** 2 / (4 * tau)
        np.testing.assert_allclose(bounds, (1 + eta) * np.exp(-eta), rtol=1e-12)


def test_entropy_bounds_catch_an_entropy_above_the_ratios(make_cone_profile):
    p = make_cone_profile(1.0, [0.5, 1.0, 2.0, 4.0])
    too_big = [EntropyValue(1.0, 1.2, 1e-9)]
    record = check_entropy_bounds(p, too_big)
    assert not record.passed
    assert "upper side" in record.detail


def test_entropy_bounds_hold_unconverged_values_to_their_brackets(make_cone_profile):
    p = make_cone_profile(1.0, [0.5, 1.0, 2.0, 4.0])
    wide = [EntropyValue(1.0, 1.0, 1e-9), EntropyValue(100.0, 0.8, 0.3, converged=False)]
    record = check_entropy_bounds(p, wide)
    assert record.passed
    assert record.grid["tau"] == [1.0, 100.0]
    assert record.grid["unconverged_tau"] == [100.0]
    assert record.detail.endswith("1 unconverged tau value(s) checked by bracket")

    # (1 + eta) e^{-eta} from r = 4 at tau = 100 is about 0.9992, above the bracket
    short = [EntropyValue(100.0, 0.5, 0.1, converged=False)]
    record = check_entropy_bounds(p, short)
    assert not record.passed
    assert "lower side" in record.detail


def test_entropy_bounds_use_eavr_bracket_beyond_the_last_radius(make_cone_profile):
    p = make_cone_profile(1.0, [0.5, 1.0, 2.0])
    above_samples = [EntropyValue(1.0, 1.05, 1e-9)]
    assert not check_entropy_bounds(p, above_samples).passed
    assert check_entropy_bounds(p, above_samples, EavrEstimate(1.0, 1.0, 1.1, True)).passed
    assert not check_entropy_bounds(p, above_samples, EavrEstimate(1.0, 1.0, math.inf, False)).passed


def test_monotonicity_and_cone_checks_on_synthetic_scans():
    rising = [EntropyValue(t, 1.0 + 0.1 * k, 1e-6) for k, t in enumerate([1.0, 10.0, 100.0])]
    falling = [EntropyValue(t, 1.0 - 0.1 * k, 1e-6) for k, t in enumerate([1.0, 10.0, 100.0])]
    flat = [EntropyValue(t, 2.0, 1e-10) for t in (1.0, 10.0, 100.0)]
    assert check_entropy_monotonicity(rising).passed
    assert not check_entropy_monotonicity(falling).passed
    assert check_cone_invariance(flat, True).passed
    assert not check_cone_invariance(rising, True).passed
    assert check_cone_invariance(rising, False).passed
    assert not check_cone_invariance(flat, False).passed

    wide = [EntropyValue(1.0, 1.0, 1e-6), EntropyValue(10.0, 0.5, 1.0, converged=False)]
    record = check_entropy_monotonicity(wide)
    assert record.applicable and record.passed
    assert record.grid["unconverged_tau"] == [10.0]
    assert "1 unconverged tau value(s) checked by bracket" in record.detail

    narrow = [EntropyValue(1.0, 1.0, 1e-6), EntropyValue(10.0, 0.5, 0.1, converged=False)]
    record = check_entropy_monotonicity(narrow)
    assert record.applicable and not record.passed
    assert record.worst_margin == pytest.approx(0.6 - (1.0 - 1e-6))
    assert not check_entropy_monotonicity(narrow[:1]).applicable


def test_theorem_not_applicable_when_eavr_diverges():
    radii = parse_grid("log:1:1000:10")
    omega = unit_ball_volume(2)
    p = RadialProfile(AmbientPoint.origin(3), radii, omega * radii ** 2 * (1 + np.log(radii)), np.zeros(10), 2)
    eavr = eavr_estimate(p)
    record = check_theorem(eavr, entropy_curve(p, [1.0, 10.0], eavr=eavr))
    assert not record.applicable
    assert record.passed
    assert record.detail == "not applicable: EAVR diverges"
    assert not check_shell_sandwich_upper(p, eavr).applicable


def test_theorem_on_offset_plane(spec, origin3):
    # f = pi (t - 1) for t >= 1 is linear in t past the kink at r = 1, so the profile is exact
    entry = make_surface("offset_plane", {"d": 1})
    radii = 2.0 ** np.arange(11)
    p = build_profile(entry.surface, origin3, radii, spec)
    eavr = eavr_estimate(p)
    assert eavr.converged
    taus = parse_grid("log:1:10000:5")
    curve = entropy_curve(p, taus, eavr=eavr)
    for h in curve:
        assert h.value == pytest.approx(entry.closed_form_entropy(h.tau), abs=1e-6)
    record = check_theorem(eavr, curve, rtol=0.01)
    assert record.passed
    assert abs(curve[-1].value - eavr.value) < 2e-4


def test_theorem_gap_on_offset_plane_at_distance_two(spec, origin3):
    entry = make_surface("offset_plane", {"d": 2})
    # The limit is the closed-form EAVR 1; the last sampled ratio, 1 - 4/r_K^2, only approaches it
    assert entry.eavr == 1.0
    h = huisken_direct(entry.surface, origin3, 1e4, spec)
    assert h.converged
    assert h.value == pytest.approx(math.exp(-1e-4), rel=1e-8)
    assert abs(h.value - entry.eavr) < 2e-4


def test_suite_evaluates_tail_limited_tau_directly(spec, origin3):
    entry = make_surface("offset_plane", {"d": 2})
    radii = merge_breakpoints(parse_grid("log:0.5:50:8"), entry.profile_breakpoints(origin3))
    taus = parse_grid("log:0.1:1000:5")
    profile = build_profile(entry.surface, origin3, radii, spec)
    profile_curve = entropy_curve(profile, taus)
    assert not profile_curve[-1].converged

    report = run_suite(entry.surface, origin3, SuiteGrids(radii=radii, taus=taus), spec, False, SMALL_SETTINGS)
    failed = [c.to_dict() for c in report.checks if c.applicable and not c.passed and not c.advisory]
    assert report.passed, failed
    for check_id in ("entropy_bounds", "entropy_monotonicity", "cone_invariance"):
        record = report.get(check_id)
        assert record.applicable
        assert record.grid["tau"] == pytest.approx(list(taus))
        assert "unconverged_tau" not in record.grid
    assert report.get("theorem").passed


def test_theorem_uses_direct_evaluator(make_cone_profile):
    p = make_cone_profile(1.0, parse_grid("log:0.5:50:12"))
    eavr = eavr_estimate(p)
    curve = entropy_curve(p, [1.0, 100.0], eavr=eavr)
    calls = []

    def direct(tau):
        calls.append(tau)
        return EntropyValue(tau, 0.5, 1e-9)

    record = check_theorem(eavr, curve, 0.01, direct)
    assert calls == [100.0]
    assert not record.passed


def test_suite_on_union_of_planes(spec, origin3):
    entry = make_surface("k_planes", {"k": 3})
    grids = SuiteGrids(radii=parse_grid("log:0.5:50:8"), taus=parse_grid("log:0.1:1000:5"))
    report = run_suite(entry.surface, origin3, grids, spec, entry.cone_about(origin3), SMALL_SETTINGS)
    failed = [c.to_dict() for c in report.checks if c.applicable and not c.passed and not c.advisory]
    assert report.passed, failed
    ids = [c.id for c in report.checks]
    assert ids == sorted(ids)
    assert "theorem" in ids and "minimality" in ids
    assert report.get("cone_invariance").passed
    doc = report.to_dict()
    assert doc["pass"] is True
    assert doc["center"] == [0.0, 0.0, 0.0]
    assert all(set(c) >= {"id", "anchor", "pass", "worst_margin", "tolerance", "grid"} for c in doc["checks"])


def test_suite_on_sphere_reports_minimality_failure(spec, origin3):
    entry = make_surface("sphere")
    grids = SuiteGrids(radii=np.array([0.5, 1.0, 1.5, 2.5, 3.0]), taus=parse_grid("log:0.1:10:3"))
    report = run_suite(entry.surface, origin3, grids, spec, False, SMALL_SETTINGS)
    assert not report.passed
    assert not report.get("minimality").passed
    assert not report.get("density_monotonicity").passed
    theorem = report.get("theorem")
    assert not theorem.applicable
    assert theorem.detail == "not applicable: minimality failed"
    with pytest.raises(KeyError):
        report.get("no_such_check")


@pytest.mark.slow
def test_suite_on_catenoid_passes(spec, origin3):
    entry = make_surface("catenoid")
    grids = SuiteGrids(radii=parse_grid("log:0.5:100:24"), taus=parse_grid("log:0.1:100000:25"))
    report = run_suite(entry.surface, origin3, grids, spec, False, SuiteSettings())
    failed = [c.to_dict() for c in report.checks if c.applicable and not c.passed and not c.advisory]
    assert report.passed, failed
    assert report.get("cone_invariance").passed


@pytest.mark.slow
def test_suite_on_helicoid_passes_without_a_limit(spec, origin3):
    entry = make_surface("helicoid")
    grids = SuiteGrids(radii=parse_grid("log:0.5:40:16"), taus=parse_grid("log:0.1:1000:7"))
    report = run_suite(entry.surface, origin3, grids, spec, False, SMALL_SETTINGS)
    failed = [c.to_dict() for c in report.checks if c.applicable and not c.passed and not c.advisory]
    assert report.passed, failed
    assert report.get("theorem").detail == "not applicable: EAVR diverges"
    assert report.get("entropy_monotonicity").applicable
    assert report.get("cone_invariance").passed
    assert report.get("entropy_bounds").grid["unconverged_tau"]


@pytest.mark.slow
@pytest.mark.parametrize("name, upper", [("catenoid", 2.0), ("enneper", 3.0)])
def test_eavr_regression_locks(spec, origin3, regression_lock, name, upper):
    p = build_profile(make_surface(name).surface, origin3, parse_grid("log:0.5:50:24"), spec)
    estimate = eavr_estimate(p)
    assert 0.8 * upper < estimate.value <= upper + 1e-6
    regression_lock(f"{name}_eavr", estimate.value, estimate.converged, grid="log:0.5:50:24")


if __name__ == "__main__":
    logger.info("Running verification tests")
    sys.exit(pytest.main([__file__, "-v"]))
