"""
Suite Module for mce.

run_suite builds one radial profile, derives the entropy curve and EAVR
estimate from it, and runs every check against them. Checks are collected
into a VerificationReport ordered by check id.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from config.quad_config import QuadSpec
from geom.chart import AmbientPoint, Submanifold
from geom.curvature import check_minimality
from quad.integrator import EntropyValue, QuadratureError, huisken_direct, huisken_scan
from radial.profile import build_profile, eavr_estimate, entropy_curve
from verify.checks import (
    CheckRecord,
    check_cone_invariance,
    check_density_monotonicity,
    check_entropy_bounds,
    check_entropy_monotonicity,
    check_normalization_identity,
    check_shell_sandwich_lower,
    check_shell_sandwich_upper,
    check_theorem,
    not_applicable,
    record_minimality,
)

logger = logging.getLogger(__name__)

# Checks that assume a minimal surface, skipped when minimality fails
MINIMAL_ONLY = (
    ("cone_invariance", "H_{y0,tau}(M) is invariant in tau if and only if M is a cone with vertex y0"),
    ("entropy_bounds", "lower-bound chain and upper bound on H(tau)"),
    ("entropy_monotonicity", "H_{y0,tau}(M) is nondecreasing in tau on a minimal M"),
    ("shell_sandwich_lower", "A(s)/(n s^{n-1}) >= Vol(B(y0,r) ∩ M)/r^n for r <= s"),
    ("shell_sandwich_upper", "A(s)/(n s^{n-1}) <= lim Vol(B(y0,r) ∩ M)/(omega_n r^n)"),
    ("theorem", "lim_{tau -> inf} H_{y0,tau}(M) = EAVR(y0)"),
)


@dataclass(frozen=True)
class SuiteGrids:
    """Radii for the profile and tau values for the entropy scan, both ascending."""

    radii: np.ndarray
    taus: np.ndarray


@dataclass(frozen=True)
class SuiteSettings:
    minimality_samples: int = 1000
    minimality_tol: float = 1e-8
    minimality_window: float = 4.0
    theorem_rtol: float = 0.01
    eavr_rtol: float = 0.01
    seed: int = 0
    workers: int = 1

    @classmethod
    def from_config(cls, verify_config: Dict[str, Any], seed: int = 0, workers: int = 1) -> "SuiteSettings":
        return cls(seed=seed, workers=workers, **verify_config)


@dataclass
class VerificationReport:
    surface: str
    checks: List[CheckRecord] = field(default_factory=list)
    center: Optional[AmbientPoint] = None

    @property
    def passed(self) -> bool:
        """True iff every applicable, non-advisory check passed."""
        return all(c.passed for c in self.checks if c.applicable and not c.advisory)

    def get(self, check_id: str) -> CheckRecord:
        for check in self.checks:
            if check.id == check_id:
                return check
        raise KeyError(check_id)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "surface": self.surface,
            "center": list(self.center.coords) if self.center is not None else None,
            "pass": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }


def _require_converged(values: List[EntropyValue], what: str) -> None:
    bad = [v.tau for v in values if not v.converged]
    if bad:
        raise QuadratureError(f"{what} did not converge at tau = {bad}")


def _refine_tail_limited(
    M: Submanifold,
    y0: AmbientPoint,
    curve: List[EntropyValue],
    spec: QuadSpec,
    workers: int,
    cache: Dict[float, EntropyValue],
) -> List[EntropyValue]:
    """Replace profile entropies whose tail dominates the bracket by direct quadrature.

    Direct values are stored in cache by tau.

    Raises:
        QuadratureError: A direct value did not converge.
    """
    taus = [h.tau for h in curve if not h.converged]
    if not taus:
        return curve
    logger.info(f"Profile tail dominates at {len(taus)} tau value(s) from tau={taus[0]:g}; evaluating them directly")
    direct = huisken_scan(M, y0, taus, spec, workers)
    _require_converged(direct, "Direct entropy at tail-limited tau")
    cache.update((h.tau, h) for h in direct)
    return [cache.get(h.tau, h) for h in curve]


def run_suite(
    M: Submanifold,
    y0: AmbientPoint,
    grids: SuiteGrids,
    spec: QuadSpec,
    is_cone: bool = False,
    settings: Optional[SuiteSettings] = None,
) -> VerificationReport:
    """Run every check on M about y0.

    Minimality and the density check always run; when minimality fails the
    checks that assume a minimal surface are reported as not applicable.
    Direct quadrature supplies the cone-invariance scan for cones and H at the
    largest tau for the limit check. Other entropies come from the profile;
    when the EAVR converged, tau values where the profile tail swamps the
    bracket are evaluated directly instead, so every check sees the whole
    tau grid with converged values. With a diverging EAVR those values stay
    in the scan and are checked through their brackets.

    Raises:
        QuadratureError: A profile or direct value the checks depend on did not converge.
    """
    settings = settings or SuiteSettings()
    report = VerificationReport(M.label, center=y0)
    records: List[CheckRecord] = []

    minimality = check_minimality(M, settings.minimality_samples, settings.minimality_tol, settings.minimality_window, settings.seed)
    records.append(record_minimality(minimality))
    records.append(check_normalization_identity())

    profile = build_profile(M, y0, grids.radii, spec, settings.workers, validate_density=False)
    if not profile.converged:
        raise QuadratureError(f"Ball volumes of {M.label} did not converge; raise max_subdivisions or loosen eps")
    records.append(check_density_monotonicity(profile))

    if not minimality.passed:
        logger.info(f"{M.label} is not minimal; skipping checks that assume minimality")
        for check_id, anchor in MINIMAL_ONLY:
            records.append(not_applicable(check_id, anchor, "minimality failed"))
        report.checks = sorted(records, key=lambda c: c.id)
        return report

    eavr = eavr_estimate(profile, settings.eavr_rtol)
    curve = entropy_curve(profile, grids.taus, eavr=eavr, workers=settings.workers)
    logger.info(f"EAVR of {M.label}: {eavr.value:.12g} in [{eavr.low:.12g}, {eavr.high:.12g}], converged={eavr.converged}")
    direct_values: Dict[float, EntropyValue] = {}
    if eavr.converged:
        curve = _refine_tail_limited(M, y0, curve, spec, settings.workers, direct_values)

    records.append(check_shell_sandwich_lower(profile))
    records.append(check_shell_sandwich_upper(profile, eavr))
    records.append(check_entropy_bounds(profile, curve, eavr))
    records.append(check_entropy_monotonicity(curve))

    if is_cone:
        direct_scan = huisken_scan(M, y0, grids.taus, spec, settings.workers)
        _require_converged(direct_scan, "Direct entropy scan")
        records.append(check_cone_invariance(direct_scan, True))
    else:
        records.append(check_cone_invariance(curve, False))

    def direct_at(tau: float) -> EntropyValue:
        if tau in direct_values:
            return direct_values[tau]
        value = huisken_direct(M, y0, tau, spec)
        _require_converged([value], "Direct entropy")
        return value

    records.append(check_theorem(eavr, curve, settings.theorem_rtol, direct_at))
    report.checks = sorted(records, key=lambda c: c.id)
    failed = [c.id for c in report.checks if c.applicable and not c.passed]
    logger.info(f"Verification of {M.label}: {'pass' if report.passed else 'fail'}; failed checks {failed}")
    return report
