"""
Individual inequality and identity checks.

Every check returns a CheckRecord whose worst_margin is signed (positive means
the inequality holds) and already includes the slack from the quadrature
bounds that feed it, so pass means worst_margin >= -tolerance.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from geom.curvature import MinimalityResult
from quad.integrator import EntropyValue
from radial.profile import EXACT_FLOOR, EavrEstimate, RadialProfile, eavr_estimate, shell_ratios
from verify.special import incomplete_gamma_upper, normalization_identity

logger = logging.getLogger(__name__)

# Extra allowance for cone spread on top of the combined brackets
CONE_SPREAD_FLOOR = 1e-9


@dataclass(frozen=True)
class CheckRecord:
    """Result of one check; pass iff worst_margin >= -tolerance when applicable."""

    id: str
    anchor: str
    passed: bool
    worst_margin: Optional[float]
    tolerance: float
    grid: Dict[str, Any] = field(default_factory=dict)
    applicable: bool = True
    advisory: bool = False
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        margin = self.worst_margin
        return {
            "id": self.id,
            "anchor": self.anchor,
            "pass": self.passed,
            "worst_margin": margin if margin is not None and math.isfinite(margin) else None,
            "tolerance": self.tolerance,
            "grid": self.grid,
            "applicable": self.applicable,
            "advisory": self.advisory,
            "detail": self.detail,
        }


def _record(id: str, anchor: str, margin: float, tolerance: float, grid: Dict[str, Any], detail: str = "", advisory: bool = False) -> CheckRecord:
    passed = bool(margin >= -tolerance)
    if not passed:
        level = logging.WARNING if advisory else logging.INFO
        logger.log(level, f"Check {id} failed: worst margin {margin:.3e} (tolerance {tolerance:g})")
    return CheckRecord(id, anchor, passed, float(margin), tolerance, grid, True, advisory, detail)


def not_applicable(id: str, anchor: str, reason: str, grid: Optional[Dict[str, Any]] = None, advisory: bool = False) -> CheckRecord:
    return CheckRecord(id, anchor, True, None, 0.0, grid or {}, False, advisory, f"not applicable: {reason}")


def _list(values) -> List[float]:
    return [float(v) for v in values]


def _tau_grid(entropies: Sequence[EntropyValue]) -> Dict[str, Any]:
    """tau grid of a scan plus the values that only enter through their brackets."""
    grid: Dict[str, Any] = {"tau": _list(h.tau for h in entropies)}
    unconverged = _list(h.tau for h in entropies if not h.converged)
    if unconverged:
        grid["unconverged_tau"] = unconverged
    return grid


def _bracket_note(grid: Dict[str, Any]) -> str:
    count = len(grid.get("unconverged_tau", ()))
    return f"; {count} unconverged tau value(s) checked by bracket" if count else ""


def record_minimality(result: MinimalityResult) -> CheckRecord:
    return _record(
        "minimality",
        "mean curvature vanishes on M (hypothesis of the limit theorem)",
        result.tol - result.max_norm,
        0.0,
        {"samples_per_chart": result.sample_count},
        f"max |H| = {result.max_norm:.3e} on chart {result.worst_chart} at u={result.worst_u}",
    )


def check_normalization_identity(max_n: int = 10) -> CheckRecord:
    """omega_n (n/2) pi^{-n/2} Gamma(n/2) = 1 for n = 1..max_n."""
    residuals = [normalization_identity(n) for n in range(1, max_n + 1)]
    worst = max(residuals)
    return _record(
        "normalization_identity",
        "omega_n (n/2) pi^{-n/2} Gamma(n/2) = Gaussian integral over R^n = 1",
        EXACT_FLOOR - worst,
        0.0,
        {"n": list(range(1, max_n + 1))},
        f"max residual {worst:.3e}",
    )


def check_density_monotonicity(p: RadialProfile) -> CheckRecord:
    """f_j / r_j^n >= f_i / r_i^n - slack for all i < j."""
    ratios, slack = p.ratios, p.ratio_slack
    worst = math.inf
    where = None
    for i in range(len(p) - 1):
        margins = ratios[i + 1:] - ratios[i] + slack[i + 1:] + slack[i]
        j = int(np.argmin(margins))
        if margins[j] < worst:
            worst = float(margins[j])
            where = (float(p.radii[i]), float(p.radii[i + 1 + j]))
    if where is None:
        worst = 0.0
    return _record(
        "density_monotonicity",
        "Vol(B(y0,s) ∩ M)/s^n >= Vol(B(y0,r) ∩ M)/r^n for s >= r",
        worst,
        EXACT_FLOOR,
        {"r": _list(p.radii)},
        f"worst pair (r, s) = {where}" if where else "single radius",
    )


def check_shell_sandwich_lower(p: RadialProfile) -> CheckRecord:
    """Shell ratio at s dominates every density ratio at r <= s."""
    idx, shell, slack = shell_ratios(p)
    anchor = "A(s)/(n s^{n-1}) >= Vol(B(y0,r) ∩ M)/r^n for r <= s (normalized by omega_n)"
    if idx.size == 0:
        return not_applicable("shell_sandwich_lower", anchor, "profile needs at least 3 radii")
    lower = np.maximum.accumulate(p.ratios - p.ratio_slack)
    margins = shell - lower[idx] + slack
    k = int(np.argmin(margins))
    return _record(
        "shell_sandwich_lower",
        anchor,
        float(margins[k]),
        EXACT_FLOOR,
        {"s": _list(p.radii[idx])},
        f"tightest at s={p.radii[idx[k]]:g}: shell {shell[k]:.12g} vs ratio {lower[idx[k]]:.12g}",
    )


def check_shell_sandwich_upper(p: RadialProfile, eavr: EavrEstimate) -> CheckRecord:
    """Shell ratio at s stays below the EAVR upper bracket.

    Advisory: the shell ratio here is f' / (n omega_n s^{n-1}), and f' exceeds
    the sphere-section area by the co-area factor, so the bound can fail near
    a neck even on minimal surfaces. It holds exactly on cones.
    """
    anchor = "A(s)/(n s^{n-1}) <= lim Vol(B(y0,r) ∩ M)/(omega_n r^n)"
    idx, shell, slack = shell_ratios(p)
    if idx.size == 0:
        return not_applicable("shell_sandwich_upper", anchor, "profile needs at least 3 radii", advisory=True)
    if not math.isfinite(eavr.high):
        return not_applicable("shell_sandwich_upper", anchor, "EAVR diverges", {"s": _list(p.radii[idx])}, advisory=True)
    margins = eavr.high - shell + slack
    k = int(np.argmin(margins))
    return _record(
        "shell_sandwich_upper",
        anchor,
        float(margins[k]),
        EXACT_FLOOR,
        {"s": _list(p.radii[idx])},
        f"tightest at s={p.radii[idx[k]]:g}: shell {shell[k]:.12g} vs EAVR high {eavr.high:.12g}",
        advisory=True,
    )


def check_shell_sandwich(p: RadialProfile, eavr: Optional[EavrEstimate] = None) -> CheckRecord:
    """Both sides of the shell sandwich as one record.

    Fails when either side fails; the record is advisory when only the upper
    side does. eavr defaults to eavr_estimate(p).
    """
    anchor = "Vol(B(y0,r) ∩ M)/r^n <= A(s)/(n s^{n-1}) <= lim Vol(B(y0,r) ∩ M)/(omega_n r^n) for r <= s"
    lower = check_shell_sandwich_lower(p)
    if not lower.applicable:
        return not_applicable("shell_sandwich", anchor, "profile needs at least 3 radii")
    upper = check_shell_sandwich_upper(p, eavr if eavr is not None else eavr_estimate(p))
    margins = [lower.worst_margin] + ([upper.worst_margin] if upper.applicable else [])
    record = _record("shell_sandwich", anchor, min(margins), EXACT_FLOOR, lower.grid, f"lower: {lower.detail}; upper: {upper.detail}")
    if record.passed or not lower.passed:
        return record
    return CheckRecord(record.id, anchor, False, record.worst_margin, record.tolerance, record.grid, True, True, record.detail)


def entropy_lower_bound(p: RadialProfile, tau: float) -> np.ndarray:
    """Lower-bound chain for H(tau) from each sample radius, using f_i - bound_i."""
    n = p.n
    f = np.maximum(p.values - p.bounds, 0.0)
    eta = p.radii ** 2 / (4.0 * tau)
    weight = (4.0 * math.pi * tau) ** (-0.5 * n) * np.exp(-eta)
    tail = 0.5 * n * math.pi ** (-0.5 * n) * (f / p.t) * incomplete_gamma_upper(0.5 * n, eta)
    return weight * f + tail


def check_entropy_bounds(p: RadialProfile, entropies: Sequence[EntropyValue], eavr: Optional[EavrEstimate] = None) -> CheckRecord:
    """Lower-bound chain at every (r, tau) and H(tau) <= sup density ratio + slack.

    Every tau enters, converged or not: the upper side uses H.low and the
    lower side H.high, so an unconverged value is held to its bracket. The
    sup runs over all r, so a finite EAVR upper bracket raises the sampled sup.
    """
    worst = math.inf
    detail = ""
    sup_ratio = float(np.max(p.ratios + p.ratio_slack))
    if eavr is not None and math.isfinite(eavr.high):
        sup_ratio = max(sup_ratio, eavr.high)
    grid = _tau_grid(entropies)
    for h in entropies:
        upper_margin = sup_ratio - h.low
        if upper_margin < worst:
            worst, detail = upper_margin, f"upper side at tau={h.tau:g}: H.low {h.low:.12g} vs sup ratio {sup_ratio:.12g}"
        bounds = entropy_lower_bound(p, h.tau)
        i = int(np.argmax(bounds))
        lower_margin = h.high - float(bounds[i])
        if lower_margin < worst:
            worst, detail = lower_margin, f"lower side at r={p.radii[i]:g}, tau={h.tau:g}: H.high {h.high:.12g} vs bound {bounds[i]:.12g}"
    if not math.isfinite(worst):
        worst = 0.0
    return _record(
        "entropy_bounds",
        "(4 pi tau)^{-n/2} e^{-r^2/4tau} f(r) + (n/2) pi^{-n/2} (f(r)/r^n) Gamma(n/2, r^2/4tau) <= H(tau) <= sup Vol(B(y0,r) ∩ M)/(omega_n r^n)",
        worst,
        EXACT_FLOOR,
        {"r": _list(p.radii), **grid},
        detail + _bracket_note(grid),
    )


def check_entropy_monotonicity(entropies: Sequence[EntropyValue]) -> CheckRecord:
    """H nondecreasing in tau within brackets; unconverged values count through their brackets."""
    anchor = "H_{y0,tau}(M) is nondecreasing in tau on a minimal M"
    if len(entropies) < 2:
        return not_applicable("entropy_monotonicity", anchor, "fewer than two tau values")
    points = sorted(entropies, key=lambda h: h.tau)
    worst = math.inf
    detail = ""
    for i, a in enumerate(points[:-1]):
        for b in points[i + 1:]:
            margin = b.high - a.low
            if margin < worst:
                worst, detail = margin, f"tau {a.tau:g} -> {b.tau:g}: {a.value:.12g} -> {b.value:.12g}"
    grid = _tau_grid(points)
    return _record("entropy_monotonicity", anchor, worst, EXACT_FLOOR, grid, detail + _bracket_note(grid))


def check_cone_invariance(entropies: Sequence[EntropyValue], is_cone: bool) -> CheckRecord:
    """Cones: spread over tau within brackets + 1e-9. Otherwise: some bracket-separated increase."""
    anchor = "H_{y0,tau}(M) is invariant in tau if and only if M is a cone with vertex y0"
    if len(entropies) < 2:
        return not_applicable("cone_invariance", anchor, "fewer than two tau values")
    points = sorted(entropies, key=lambda h: h.tau)
    grid = _tau_grid(points)
    note = _bracket_note(grid)
    values = np.array([h.value for h in points])
    if is_cone:
        hi, lo = int(np.argmax(values)), int(np.argmin(values))
        spread = float(values[hi] - values[lo])
        allowed = points[hi].error_bound + points[lo].error_bound + CONE_SPREAD_FLOOR
        return _record("cone_invariance", anchor, allowed - spread, 0.0, grid, f"cone: spread {spread:.3e}, allowed {allowed:.3e}{note}")
    best = -math.inf
    detail = ""
    for i, a in enumerate(points[:-1]):
        for b in points[i + 1:]:
            gain = b.low - a.high
            if gain > best:
                best, detail = gain, f"non-cone: increase {gain:.3e} beyond brackets from tau {a.tau:g} to {b.tau:g}"
    return _record("cone_invariance", anchor, best - EXACT_FLOOR, 0.0, grid, detail + note)


def check_theorem(
    eavr: EavrEstimate,
    entropies: Sequence[EntropyValue],
    rtol: float = 0.01,
    direct: Optional[Callable[[float], EntropyValue]] = None,
) -> CheckRecord:
    """|H(tau_max) - EAVR| within rtol + brackets, with a closing gap along the tau grid.

    Args:
        eavr: Must be converged, otherwise the check is not applicable.
        entropies: Profile entropies on the tau grid (ascending).
        direct: Optional evaluator used for H(tau_max) instead of the last curve point.
    """
    anchor = "lim_{tau -> inf} H_{y0,tau}(M) = EAVR(y0)"
    taus = _list(h.tau for h in entropies)
    if not eavr.converged:
        return not_applicable("theorem", anchor, "EAVR diverges", {"tau": taus})
    if not entropies:
        return not_applicable("theorem", anchor, "empty tau grid")
    tau_max = max(taus)
    final = direct(tau_max) if direct is not None else max(entropies, key=lambda h: h.tau)
    gap = abs(final.value - eavr.value)
    allowed = rtol * eavr.value + final.error_bound + (eavr.high - eavr.low)
    margin = allowed - gap

    trajectory = sorted(entropies, key=lambda h: h.tau)
    closing = math.inf
    for a, b in zip(trajectory[:-1], trajectory[1:]):
        # E - H must not grow along tau
        step = (eavr.value - a.value) - (eavr.value - b.value) + a.error_bound + b.error_bound
        closing = min(closing, step)
    worst = min(margin, closing)
    detail = (
        f"H({tau_max:g}) = {final.value:.12g} ± {final.error_bound:.3e}, EAVR = {eavr.value:.12g} "
        f"[{eavr.low:.12g}, {eavr.high:.12g}], gap {gap:.3e}, allowed {allowed:.3e}; "
        f"gaps {[round(eavr.value - h.value, 12) for h in trajectory]}"
    )
    return _record("theorem", anchor, worst, EXACT_FLOOR, {"tau": taus}, detail)
