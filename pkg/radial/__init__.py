"""
Radial-profile calculus for mce: f(r) = Vol(B(y0, r) ∩ M) and everything derived from it.
"""

from .profile import (
    EavrEstimate,
    ProfileError,
    RadialProfile,
    blowdown,
    build_profile,
    eavr_estimate,
    entropy_curve,
    entropy_from_profile,
    merge_breakpoints,
    shell_ratios,
    unit_ball_volume,
    validate_profile,
)

__all__ = [
    "EavrEstimate",
    "ProfileError",
    "RadialProfile",
    "blowdown",
    "build_profile",
    "eavr_estimate",
    "entropy_curve",
    "entropy_from_profile",
    "merge_breakpoints",
    "shell_ratios",
    "unit_ball_volume",
    "validate_profile",
]
