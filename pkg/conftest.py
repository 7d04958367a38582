"""
Shared fixtures for the mce test modules.
"""

import json
import logging
import math
import os
import sys
from typing import Optional

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from config.quad_config import QuadSpec  # noqa: E402
from geom.chart import AmbientPoint  # noqa: E402
from radial.profile import RadialProfile, unit_ball_volume  # noqa: E402

logger = logging.getLogger(__name__)

REGRESSION_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "regression")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-size runs on curved surfaces")


@pytest.fixture
def spec() -> QuadSpec:
    return QuadSpec()


@pytest.fixture
def origin3() -> AmbientPoint:
    return AmbientPoint.origin(3)


def cone_profile(c: float, radii, n: int = 2, ambient: int = 3) -> RadialProfile:
    """Exact profile of a cone with density c: f = c omega_n r^n."""
    radii = np.asarray(radii, dtype=float)
    values = c * unit_ball_volume(n) * radii ** n
    return RadialProfile(AmbientPoint.origin(ambient), radii, values, np.zeros_like(radii), n, f"cone(c={c:g})")


@pytest.fixture
def make_cone_profile():
    return cone_profile


@pytest.fixture
def regression_lock():
    """Compare a measured value with the committed regression/<name>.json.

    A missing lock fails the test. Set MCE_WRITE_REGRESSION=1 to (re)write it.
    """

    def check(name: str, value: float, converged: Optional[bool] = None, rtol: float = 1e-6, **extra) -> float:
        path = os.path.join(REGRESSION_DIR, f"{name}.json")
        if os.getenv("MCE_WRITE_REGRESSION") == "1":
            os.makedirs(REGRESSION_DIR, exist_ok=True)
            doc = {**extra, "value": value, "rtol": rtol}
            if converged is not None:
                doc["converged"] = converged
            with open(path, "w") as f:
                json.dump(doc, f, indent=2)
            logger.info(f"Wrote regression lock {path} with value {value!r}")
            return value
        if not os.path.exists(path):
            pytest.fail(f"Regression lock {path} is missing; run with MCE_WRITE_REGRESSION=1 to create it")
        with open(path, "r") as f:
            locked = json.load(f)
        tolerance = float(locked.get("rtol", rtol))
        assert math.isclose(value, locked["value"], rel_tol=tolerance), f"{name}: {value!r} drifted from locked {locked['value']!r}"
        if converged is not None and "converged" in locked:
            assert converged == locked["converged"], f"{name}: converged={converged} but lock says {locked['converged']}"
        return locked["value"]

    return check
