"""
Quadrature Configuration Module for mce.

This module holds the numerical defaults used by the integrators and the
verification suite. QuadSpec is the immutable bundle handed to the
quadrature routines; QuadConfig loads the JSON defaults file that sits next
to this module and lets a file (or MCE_QUAD_CONFIG) override any of them.
"""

import copy
import json
import logging
import os
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = os.path.join(os.path.dirname(__file__), "quad_config.json")

DEFAULTS: Dict[str, Any] = {
    "quad": {
        "eps": 1e-9,
        "max_subdivisions": 50000,
        "cells_per_axis": 8,
        "clip_depth": 5,
        "c_tail": 1.5,
        "base_order": 8,
        "check_order": 12,
        "subsamples": 16,
    },
    "verify": {
        "minimality_samples": 1000,
        "minimality_tol": 1e-8,
        "minimality_window": 4.0,
        "theorem_rtol": 0.01,
        "eavr_rtol": 0.01,
    },
    "grids": {
        "r": "log:0.5:50:24",
        "tau": "log:0.1:100000:25",
    },
    "workers": 1,
}


@dataclass(frozen=True)
class QuadSpec:
    """Accuracy and budget knobs for huisken_direct and ball_volume.

    Attributes:
        eps: Target relative error, in (0, 1).
        max_subdivisions: Cell budget; exceeding it yields an unconverged result.
        cells_per_axis: Initial grid per parameter axis.
        clip_depth: Bisection depth for cells straddling a ball boundary.
        c_tail: Safety factor on the Gaussian truncation radius.
        base_order: Gauss-Legendre order per axis for the estimate.
        check_order: Higher order used for the per-cell error estimate.
        subsamples: Sub-samples per axis for cells still straddling at clip depth.
    """

    eps: float = 1e-9
    max_subdivisions: int = 50000
    cells_per_axis: int = 8
    clip_depth: int = 5
    c_tail: float = 1.5
    base_order: int = 8
    check_order: int = 12
    subsamples: int = 16

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")
        for name in ("max_subdivisions", "cells_per_axis", "clip_depth", "base_order", "subsamples"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.check_order <= self.base_order:
            raise ValueError(f"check_order ({self.check_order}) must exceed base_order ({self.base_order})")
        if self.subsamples < 2:
            raise ValueError(f"subsamples must be >= 2, got {self.subsamples}")
        if self.c_tail < 1.0:
            raise ValueError(f"c_tail must be >= 1, got {self.c_tail}")

    def with_eps(self, eps: float) -> "QuadSpec":
        return replace(self, eps=float(eps))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class QuadConfig:
    """Loads quadrature and verification defaults from a JSON file."""

    def __init__(self, config_path: str = None):
        """Initialize the configuration.

        Args:
            config_path: Path to the JSON file. Defaults to MCE_QUAD_CONFIG if
                set, else quad_config.json next to this module.
        """
        self.config_path = config_path or os.getenv("MCE_QUAD_CONFIG") or DEFAULT_CONFIG_PATH
        self.config = copy.deepcopy(DEFAULTS)
        self.load_config()

    def load_config(self) -> None:
        """Load configuration from the JSON file, keeping defaults for missing keys."""
        if not os.path.exists(self.config_path):
            logger.warning(f"Quadrature configuration file {self.config_path} not found. Using defaults.")
            return
        try:
            with open(self.config_path, "r") as f:
                loaded = json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"Quadrature configuration {self.config_path} is not valid JSON: {e}")
        logger.info(f"Loading quadrature configuration from {self.config_path}")
        self._deep_merge(self.config, loaded)

    def _deep_merge(self, target: dict, source: dict) -> None:
        """Deep merge source dict into target dict, preserving nested structures."""
        for key, value in source.items():
            if key in target and isinstance(target[key], dict) and isinstance(value, dict):
                self._deep_merge(target[key], value)
            else:
                target[key] = value

    def quad_spec(self) -> QuadSpec:
        """QuadSpec built from the "quad" section."""
        section = self.config["quad"]
        unknown = set(section) - set(DEFAULTS["quad"])
        if unknown:
            raise ValueError(f"Unknown quad settings in {self.config_path}: {sorted(unknown)}")
        return QuadSpec(**section)

    def get_verify_config(self) -> Dict[str, Any]:
        return self.config["verify"]

    def get_grids(self) -> Dict[str, str]:
        return self.config["grids"]

    def get_workers(self) -> int:
        return int(self.config.get("workers", 1))
