#!/usr/bin/env python3
"""
mce: Gaussian-weighted entropy and asymptotic volume ratio of minimal submanifolds

Subcommands:
    entropy    H_{y0,tau}(M) at one tau by direct quadrature (JSON)
    sweep      H over a tau grid, from a radial profile or by direct quadrature (CSV)
    eavr       ball-volume ratios and the extrinsic asymptotic volume ratio (CSV)
    verify     run every check on a surface (JSON report)
    blowdown   rescaled volumes and shell ratios of the blow-down sequence (CSV)

Usage:
    python main.py entropy --surface catenoid --tau 1000
    python main.py sweep --surface '{"name":"k_planes","params":{"k":3}}' --plot sweep.svg
    python main.py verify --surface catenoid

Exit status: 0 success, 1 failed checks, 2 bad input, 3 numeric non-convergence.
"""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional

import numpy as np
from dotenv import load_dotenv

from config.quad_config import QuadConfig
from config.run_config import ConfigError, RunConfig, parse_values
from expr.errors import ExprError
from export import FileOutput, load_profile, plot_curve, save_profile
from geom.chart import AmbientPoint
from quad.integrator import QuadratureError, huisken_direct, huisken_scan
from radial.profile import ProfileError, RadialProfile, blowdown, build_profile, eavr_estimate, entropy_curve, merge_breakpoints
from verify.suite import SuiteGrids, SuiteSettings, run_suite
from zoo.registry import ZooEntry, load_surface_spec

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED_CHECKS = 1
EXIT_BAD_INPUT = 2
EXIT_NOT_CONVERGED = 3

COMMANDS = ("entropy", "sweep", "eavr", "verify", "blowdown")


class Context:
    """Everything a subcommand needs once the configuration is resolved."""

    def __init__(self, config: RunConfig, quad_config: QuadConfig):
        self.config = config
        self.quad_config = quad_config
        self.entry: ZooEntry = load_surface_spec(config.surface)
        self.surface = self.entry.surface
        if config.center is not None:
            self.center = AmbientPoint.parse(config.center, self.surface.ambient_dim)
        else:
            self.center = self.entry.default_center()
        self.spec = config.quad_spec(quad_config.quad_spec())
        self.output = FileOutput(config.out, config.command, config.config_hash(), config.format)

    def eavr_rtol(self) -> float:
        return float(self.quad_config.get_verify_config()["eavr_rtol"])

    def r_grid(self) -> np.ndarray:
        """--r-grid plus the surface's kink radii about the center."""
        return merge_breakpoints(self.config.r_values_grid(), self.entry.profile_breakpoints(self.center))

    def profile(self) -> RadialProfile:
        """Saved profile when --from-profile is given, otherwise a freshly built one."""
        config = self.config
        if config.from_profile:
            center = self.center if config.center is not None else None
            profile = load_profile(config.from_profile, n=self.surface.dim, center=center, label=self.surface.label)
            logger.info(f"Reusing profile {config.from_profile} with {len(profile)} radii")
            return profile
        return build_profile(self.surface, self.center, self.r_grid(), self.spec, config.workers)


def cmd_entropy(ctx: Context) -> int:
    tau = ctx.config.tau
    if tau is None:
        raise ConfigError("entropy needs --tau")
    value = huisken_direct(ctx.surface, ctx.center, tau, ctx.spec)
    ctx.output.write_document(value.to_dict())
    if not value.converged:
        logger.error(f"H({tau:g}) of {ctx.surface.label} did not converge (bound {value.error_bound:.3e})")
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_sweep(ctx: Context) -> int:
    config = ctx.config
    taus = config.tau_values()
    reference: Optional[float] = None
    if config.method == "direct":
        values = huisken_scan(ctx.surface, ctx.center, taus, ctx.spec, config.workers)
        quadrature_converged = all(v.converged for v in values)
    else:
        profile = ctx.profile()
        eavr = eavr_estimate(profile, ctx.eavr_rtol()) if len(profile) >= 3 else None
        values = entropy_curve(profile, taus, ctx.spec.eps, eavr, config.workers)
        quadrature_converged = profile.converged
        tail_limited = [v.tau for v in values if not v.converged]
        if tail_limited:
            logger.warning(f"Profile tail dominates the bracket at {len(tail_limited)} tau values from tau={tail_limited[0]:g}")
        if eavr is not None:
            reference = eavr.value
    rows = [(v.tau, v.value, v.low, v.high) for v in values]
    ctx.output.write_table(("tau", "entropy", "bound_low", "bound_high"), rows)
    if config.plot:
        plot_curve(
            config.plot,
            [r[0] for r in rows],
            [r[1] for r in rows],
            [r[2] for r in rows],
            [r[3] for r in rows],
            xlabel="tau",
            ylabel="H",
            title=f"H_(y0,tau)({ctx.surface.label})",
            reference=reference,
        )
    return EXIT_OK if quadrature_converged else EXIT_NOT_CONVERGED


def cmd_eavr(ctx: Context) -> int:
    config = ctx.config
    profile = ctx.profile()
    estimate = eavr_estimate(profile, ctx.eavr_rtol())
    rows = [(r, v, ratio, b) for r, v, ratio, b in zip(profile.radii, profile.values, profile.ratios, profile.bounds)]
    ctx.output.write_table(("r", "volume", "ratio", "bound"), rows, summary=estimate.to_dict())
    logger.info(f"EAVR of {ctx.surface.label}: {estimate.value:.12g} in [{estimate.low:.12g}, {estimate.high:.12g}], converged={estimate.converged}")
    if config.save_profile:
        save_profile(config.save_profile, profile, ctx.output.config_hash)
    if config.plot:
        plot_curve(
            config.plot,
            profile.radii,
            profile.ratios,
            profile.ratios - profile.ratio_slack,
            profile.ratios + profile.ratio_slack,
            xlabel="r",
            ylabel="Vol(B(y0,r) ∩ M) / (omega_n r^n)",
            title=f"Volume ratio of {ctx.surface.label}",
            reference=estimate.value if estimate.converged else None,
        )
    return EXIT_OK if profile.converged else EXIT_NOT_CONVERGED


def cmd_verify(ctx: Context) -> int:
    config = ctx.config
    grids = SuiteGrids(radii=ctx.r_grid(), taus=config.tau_values())
    settings = SuiteSettings.from_config(ctx.quad_config.get_verify_config(), seed=config.seed, workers=config.workers)
    report = run_suite(ctx.surface, ctx.center, grids, ctx.spec, ctx.entry.cone_about(ctx.center), settings)
    ctx.output.write_document(report.to_dict())
    return EXIT_OK if report.passed else EXIT_FAILED_CHECKS


def cmd_blowdown(ctx: Context) -> int:
    profile = ctx.profile()
    radii = parse_values(ctx.config.r_values) if ctx.config.r_values else profile.radii
    lo, hi = float(profile.radii[0]), float(profile.radii[-1])
    outside = [float(r) for r in radii if not lo * (1 - 1e-12) <= r <= hi * (1 + 1e-12)]
    if outside:
        raise ConfigError(f"r values {outside} lie outside the profile range [{lo:g}, {hi:g}]")
    rows = [(float(r),) + blowdown(profile, float(r)) for r in radii]
    ctx.output.write_table(("r_j", "normalized_volume", "shell_ratio"), rows)
    return EXIT_OK if profile.converged else EXIT_NOT_CONVERGED


HANDLERS = {
    "entropy": cmd_entropy,
    "sweep": cmd_sweep,
    "eavr": cmd_eavr,
    "verify": cmd_verify,
    "blowdown": cmd_blowdown,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--surface", type=str, help="Surface name, inline JSON, or @file")
    common.add_argument("--center", type=str, help="Center y0 as x,y,z... (default: the surface's center, else origin)")
    common.add_argument("--tau", type=float, help="Single tau value")
    common.add_argument("--tau-grid", type=str, help="tau grid, lin|log:lo:hi:count")
    common.add_argument("--r-grid", type=str, help="Radius grid, lin|log:lo:hi:count")
    common.add_argument("--eps", type=float, help="Target relative error")
    common.add_argument("--out", type=str, help="Output path (default: stdout)")
    common.add_argument("--format", type=str, choices=["csv", "json"], help="Table format")
    common.add_argument("--plot", type=str, help="Write an SVG plot to this path")
    common.add_argument("--seed", type=int, help="Seed for low-discrepancy sampling offsets")
    common.add_argument("--config", type=str, help="JSON run configuration file")
    common.add_argument("--log-level", type=str, help="Logging level (default: MCE_LOG_LEVEL or INFO)")
    common.add_argument("--workers", type=int, help="Worker threads for radii and tau values")

    parser = argparse.ArgumentParser(description="Gaussian-weighted entropy and EAVR of minimal submanifolds")
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser("entropy", parents=[common], help="H at one tau by direct quadrature")
    sweep = subparsers.add_parser("sweep", parents=[common], help="H over a tau grid")
    sweep.add_argument("--method", type=str, choices=["profile", "direct"], help="Evaluate from a radial profile or directly")
    sweep.add_argument("--from-profile", type=str, help="Reuse a profile saved by eavr --save-profile")
    eavr = subparsers.add_parser("eavr", parents=[common], help="Volume ratios and EAVR estimate")
    eavr.add_argument("--save-profile", type=str, help="Save the radial profile as CSV r,volume,bound")
    subparsers.add_parser("verify", parents=[common], help="Run every check and report")
    blow = subparsers.add_parser("blowdown", parents=[common], help="Blow-down volumes and shell ratios")
    blow.add_argument("--r-values", type=str, help="Comma-separated radii (default: profile radii)")
    blow.add_argument("--from-profile", type=str, help="Reuse a profile saved by eavr --save-profile")
    return parser


def setup_logging(level_name: Optional[str]) -> None:
    level_name = (level_name or os.getenv("MCE_LOG_LEVEL") or "INFO").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        raise ConfigError(f"Unknown log level '{level_name}'")
    logging.basicConfig(level=level, format="%(asctime)s - %(levelname)s - %(message)s", stream=sys.stderr, force=True)


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand and return its exit status."""
    load_dotenv()
    args = build_parser().parse_args(argv)
    flags: Dict[str, Any] = {key: value for key, value in vars(args).items() if key not in ("command", "config")}

    try:
        setup_logging(args.log_level)
        quad_config = QuadConfig()
        config = RunConfig.resolve(args.command, flags, quad_config, args.config)
        ctx = Context(config, quad_config)
        return HANDLERS[args.command](ctx)
    except ExprError as e:
        print(e.format(), file=sys.stderr)
        return EXIT_BAD_INPUT
    except (QuadratureError, ProfileError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
