"""
Run Configuration Module for mce.

A RunConfig is everything one CLI invocation depends on. Values resolve as
command-line flags > --config JSON file > defaults (QuadConfig and the
environment). The canonical JSON of the resolved config is hashed for the
provenance header written into every output.
"""

import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, Optional

import numpy as np

from config.quad_config import QuadConfig, QuadSpec

logger = logging.getLogger(__name__)

GRID_KINDS = ("lin", "log")
OUTPUT_FORMATS = ("csv", "json")
SWEEP_METHODS = ("profile", "direct")

# Keys that only choose where or how loudly results are written
NON_PROVENANCE_KEYS = ("out", "plot", "log_level", "workers", "save_profile")


class ConfigError(ValueError):
    """Malformed grid, flag value or configuration file."""


def parse_grid(text: str) -> np.ndarray:
    """Parse "lin:lo:hi:k" or "log:lo:hi:k" into k strictly increasing values.

    Raises:
        ConfigError: Unknown kind, lo >= hi, k < 2, or lo <= 0 for log grids.
    """
    parts = str(text).split(":")
    if len(parts) != 4:
        raise ConfigError(f"Grid '{text}' must look like lin|log:lo:hi:count")
    kind, lo, hi, count = parts
    if kind not in GRID_KINDS:
        raise ConfigError(f"Grid '{text}': kind must be one of {GRID_KINDS}")
    try:
        lo, hi = float(lo), float(hi)
        count = int(count)
    except ValueError:
        raise ConfigError(f"Grid '{text}': bounds must be numbers and count an integer")
    if not lo < hi:
        raise ConfigError(f"Grid '{text}': need lo < hi")
    if count < 2:
        raise ConfigError(f"Grid '{text}': need count >= 2")
    if kind == "log":
        if lo <= 0:
            raise ConfigError(f"Grid '{text}': log grids need lo > 0")
        values = np.logspace(np.log10(lo), np.log10(hi), count)
        values[0], values[-1] = lo, hi
        return values
    return np.linspace(lo, hi, count)


def parse_values(text: str) -> np.ndarray:
    """Comma-separated list of positive numbers, e.g. "1,2,4"."""
    try:
        values = np.array([float(part) for part in str(text).split(",")], dtype=float)
    except ValueError:
        raise ConfigError(f"Cannot parse value list '{text}'")
    if values.size == 0 or np.any(~np.isfinite(values)) or np.any(values <= 0):
        raise ConfigError(f"Value list '{text}' must contain positive finite numbers")
    return values


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings for one CLI command."""

    command: str
    surface: str
    center: Optional[str] = None
    tau: Optional[float] = None
    tau_grid: str = "log:0.1:100000:25"
    r_grid: str = "log:0.5:50:24"
    eps: Optional[float] = None
    seed: int = 0
    format: str = "csv"
    method: str = "profile"
    from_profile: Optional[str] = None
    r_values: Optional[str] = None
    out: Optional[str] = None
    plot: Optional[str] = None
    save_profile: Optional[str] = None
    workers: int = 1
    log_level: Optional[str] = None
    quad: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.format not in OUTPUT_FORMATS:
            raise ConfigError(f"format must be one of {OUTPUT_FORMATS}, got {self.format!r}")
        if self.method not in SWEEP_METHODS:
            raise ConfigError(f"method must be one of {SWEEP_METHODS}, got {self.method!r}")
        if self.tau is not None and not self.tau > 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if self.eps is not None and not 0.0 < self.eps < 1.0:
            raise ConfigError(f"eps must lie in (0, 1), got {self.eps}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.plot is not None and not self.plot.endswith(".svg"):
            raise ConfigError(f"plot path must end in .svg, got {self.plot!r}")

    @classmethod
    def resolve(cls, command: str, flags: Dict[str, Any], quad_config: QuadConfig, config_path: Optional[str] = None) -> "RunConfig":
        """Merge defaults, an optional JSON config file and explicit flags.

        Args:
            command: CLI subcommand name.
            flags: Parsed flags; None means "not given".
            quad_config: Source of grid, worker and quadrature defaults.
            config_path: Optional --config JSON document.
        """
        known = {f.name for f in fields(cls)} - {"command"}
        grids = quad_config.get_grids()
        values: Dict[str, Any] = {
            "tau_grid": grids["tau"],
            "r_grid": grids["r"],
            "workers": int(os.getenv("MCE_WORKERS", quad_config.get_workers())),
        }
        if config_path:
            values.update(cls._load_file(config_path, known))
        for key, value in flags.items():
            if key in known and value is not None:
                values[key] = value
        if "surface" not in values:
            raise ConfigError("No surface given (use --surface or a config file)")
        try:
            config = cls(command=command, **values)
        except TypeError as e:
            raise ConfigError(f"Invalid configuration: {e}")
        logger.info(f"Resolved {command} config for surface {config.surface} (hash {config.config_hash()})")
        return config

    @staticmethod
    def _load_file(path: str, known) -> Dict[str, Any]:
        if not os.path.exists(path):
            raise ConfigError(f"Config file not found: {path}")
        try:
            with open(path, "r") as f:
                doc = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config file {path} is not valid JSON: {e}")
        if not isinstance(doc, dict):
            raise ConfigError(f"Config file {path} must hold a JSON object")
        doc = {key.replace("-", "_"): value for key, value in doc.items()}
        unknown = sorted(set(doc) - set(known))
        if unknown:
            raise ConfigError(f"Unknown keys in config file {path}: {unknown}")
        if isinstance(doc.get("surface"), dict):
            doc["surface"] = json.dumps(doc["surface"], sort_keys=True)
        logger.info(f"Loaded run configuration from {path}")
        return doc

    def quad_spec(self, base: QuadSpec) -> QuadSpec:
        """Base spec with config-file overrides and --eps applied."""
        overrides = dict(self.quad)
        try:
            spec = replace(base, **overrides)
            return spec.with_eps(self.eps) if self.eps is not None else spec
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid quadrature settings {overrides} (eps={self.eps}): {e}")

    def tau_values(self) -> np.ndarray:
        return parse_grid(self.tau_grid)

    def r_values_grid(self) -> np.ndarray:
        return parse_grid(self.r_grid)

    def canonical_json(self) -> str:
        data = {k: v for k, v in asdict(self).items() if k not in NON_PROVENANCE_KEYS}
        return json.dumps(data, sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        """md5 of the canonical JSON; identical settings give identical headers."""
        return hashlib.md5(self.canonical_json().encode("utf-8")).hexdigest()
