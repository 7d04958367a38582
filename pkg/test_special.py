#!/usr/bin/env python3
"""
Tests for erfc, half-integer Gamma and the upper incomplete gamma function,
checked against scipy.special and adaptive integration.
"""

import logging
import math
import sys

import numpy as np
import pytest
from scipy import integrate, special

from verify.special import erfc, gamma_tail_fraction, half_integer_gamma, incomplete_gamma_upper, normalization_identity

logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(levelname)s - %(message)s")
logger = logging.getLogger(__name__)


@pytest.mark.parametrize("x", [-3.0, -0.5, 0.0, 1e-8, 0.3, 1.0, 1.999, 2.0, 2.5, 4.0, 7.5, 12.0, 26.0])
def test_erfc_matches_scipy(x):
    assert erfc(x) == pytest.approx(float(special.erfc(x)), rel=1e-12, abs=1e-300)


def test_erfc_limits():
    assert erfc(30.0) == 0.0
    assert erfc(-30.0) == 2.0
    assert math.isnan(erfc(math.nan))


@pytest.mark.parametrize("a", [0.5, 1.0, 1.5, 2.0, 3.5, 5.0, 6.5])
def test_half_integer_gamma(a):
    assert half_integer_gamma(a) == pytest.approx(math.gamma(a), rel=1e-14)


@pytest.mark.parametrize("a", [0.5, 1.0, 1.5, 2.5, 3.0, 6.0])
def test_incomplete_gamma_upper_matches_scipy(a):
    x = np.array([0.0, 1e-3, 0.5, 1.0, 3.0, 10.0, 40.0])
    expected = special.gammaincc(a, x) * special.gamma(a)
    np.testing.assert_allclose(incomplete_gamma_upper(a, x), expected, rtol=1e-11)
    assert isinstance(incomplete_gamma_upper(a, 2.0), float)
    np.testing.assert_allclose(gamma_tail_fraction(a, x), special.gammaincc(a, x), rtol=1e-11)


def test_incomplete_gamma_rejects_unsupported_input():
    with pytest.raises(ValueError):
        incomplete_gamma_upper(0.75, 1.0)
    with pytest.raises(ValueError):
        incomplete_gamma_upper(0.0, 1.0)
    with pytest.raises(ValueError):
        incomplete_gamma_upper(1.5, -1.0)
    with pytest.raises(ValueError):
        half_integer_gamma(-0.5)


def adaptive_upper_gamma(a: float, x: float) -> float:
    integrand = lambda s: s ** (a - 1.0) * math.exp(-s)
    pieces = [(x, x + 1.0), (x + 1.0, x + 10.0), (x + 10.0, x + 80.0)]
    return sum(integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-13, limit=200)[0] for lo, hi in pieces)


def test_incomplete_gamma_upper_matches_adaptive_integration():
    rng = np.random.default_rng(20240611)
    orders = np.arange(1, 10) / 2.0
    for _ in range(50):
        a = float(rng.choice(orders))
        x = float(rng.uniform(0.01, 30.0))
        assert incomplete_gamma_upper(a, x) == pytest.approx(adaptive_upper_gamma(a, x), rel=1e-10), (a, x)


@pytest.mark.parametrize("a", [0.5, 1.0, 1.5, 2.5, 4.5])
def test_incomplete_gamma_upper_decreases_with_derivative(a):
    x = np.linspace(0.0, 30.0, 301)
    values = incomplete_gamma_upper(a, x)
    assert np.all(np.diff(values) < 0.0)

    h = 1e-4
    for point in np.linspace(1.0, 25.0, 13):
        slope = (incomplete_gamma_upper(a, point + h) - incomplete_gamma_upper(a, point - h)) / (2.0 * h)
        assert slope == pytest.approx(-(point ** (a - 1.0)) * math.exp(-point), rel=1e-6)


@pytest.mark.parametrize("n", range(1, 11))
def test_gaussian_normalization_identity(n):
    assert normalization_identity(n) < 1e-12


if __name__ == "__main__":
    logger.info("Running special function tests")
    sys.exit(pytest.main([__file__, "-v"]))
