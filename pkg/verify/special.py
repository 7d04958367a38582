"""
Special functions for Gaussian tails: erfc, half-integer Gamma and the upper
incomplete gamma function Gamma(a, x) for half-integer a.
"""

import logging
import math
from typing import Union

import numpy as np

logger = logging.getLogger(__name__)

SQRT_PI = math.sqrt(math.pi)

# erfc switches from the power series to the continued fraction here
ERFC_SPLIT = 2.0
MAX_TERMS = 500

ArrayLike = Union[float, np.ndarray]


def _erfc_series(x: float) -> float:
    # erf(x) = 2/sqrt(pi) e^{-x^2} sum_k (2x^2)^k x / (1*3*...*(2k+1)); all terms positive
    two_x2 = 2.0 * x * x
    term = x
    total = x
    for k in range(1, MAX_TERMS):
        term *= two_x2 / (2 * k + 1)
        total += term
        if term < 1e-17 * total:
            break
    return 1.0 - 2.0 / SQRT_PI * math.exp(-x * x) * total


def _erfc_continued_fraction(x: float) -> float:
    # erfc(x) = e^{-x^2}/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), modified Lentz
    tiny = 1e-300
    f = x
    c = f
    d = 0.0
    for k in range(1, MAX_TERMS):
        a = 0.5 * k
        d = x + a * d
        d = 1.0 / (d if d != 0.0 else tiny)
        c = x + a / c
        if c == 0.0:
            c = tiny
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    else:
        logger.warning(f"erfc continued fraction did not settle at x={x}")
    return math.exp(-x * x) / (SQRT_PI * f)


def erfc(x: float) -> float:
    """Complementary error function, about 1e-13 relative accuracy."""
    x = float(x)
    if math.isnan(x):
        return math.nan
    if x < 0.0:
        return 2.0 - erfc(-x)
    if x < ERFC_SPLIT:
        return _erfc_series(x)
    if x > 27.3:
        return 0.0
    return _erfc_continued_fraction(x)


def _check_half_integer(a: float) -> int:
    twice = 2.0 * float(a)
    if not (twice >= 1.0 and twice.is_integer()):
        raise ValueError(f"Only positive half-integer a is supported, got {a}")
    return int(twice)


def half_integer_gamma(a: float) -> float:
    """Gamma(a) for a in {1/2, 1, 3/2, ...} by the exact recursion from Gamma(1) and Gamma(1/2)."""
    twice = _check_half_integer(a)
    s, value = (1.0, 1.0) if twice % 2 == 0 else (0.5, SQRT_PI)
    while s < 0.5 * twice:
        value *= s
        s += 1.0
    return value


def _upper_gamma_scalar(twice: int, x: float) -> float:
    if twice % 2 == 0:
        s, value = 1.0, math.exp(-x)
    else:
        s, value = 0.5, SQRT_PI * erfc(math.sqrt(x))
    e = math.exp(-x)
    while s < 0.5 * twice:
        value = s * value + (x ** s) * e
        s += 1.0
    return value


def incomplete_gamma_upper(a: float, x: ArrayLike) -> ArrayLike:
    """Upper incomplete gamma Gamma(a, x) = int_x^inf e^{-t} t^{a-1} dt.

    Uses Gamma(a+1, x) = a Gamma(a, x) + x^a e^{-x} from Gamma(1, x) = e^{-x}
    and Gamma(1/2, x) = sqrt(pi) erfc(sqrt(x)).

    Args:
        a: Positive half-integer.
        x: Non-negative scalar or array.

    Raises:
        ValueError: Unsupported a or negative x.
    """
    twice = _check_half_integer(a)
    values = np.asarray(x, dtype=float)
    if np.any(values < 0.0) or np.any(np.isnan(values)):
        raise ValueError(f"incomplete_gamma_upper needs x >= 0, got {x}")
    if values.ndim == 0:
        return _upper_gamma_scalar(twice, float(values))
    flat = np.array([_upper_gamma_scalar(twice, float(v)) for v in values.ravel()])
    return flat.reshape(values.shape)


def gamma_tail_fraction(a: float, x: ArrayLike) -> ArrayLike:
    """Regularized upper tail Gamma(a, x) / Gamma(a)."""
    return incomplete_gamma_upper(a, x) / half_integer_gamma(a)


def normalization_identity(n: int) -> float:
    """Residual |omega_n (n/2) pi^{-n/2} Gamma(n/2) - 1| of the Gaussian normalization."""
    from radial.profile import unit_ball_volume

    omega = unit_ball_volume(n)
    return abs(omega * 0.5 * n * math.pi ** (-0.5 * n) * half_integer_gamma(0.5 * n) - 1.0)
