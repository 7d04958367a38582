"""
Profile Module for mce.

A RadialProfile samples f(r) = Vol(B(y0, r) ∩ M) once; everything else is
derived from it without touching the surface again:

    entropy_from_profile  H(tau) as a Gaussian Stieltjes integral of f
    eavr_estimate         limit of f / (omega_n r^n) with a bracket
    blowdown              rescaled volume and shell ratio at a radius

Between samples f is interpolated linearly in t = r^n after a running
maximum, which keeps it monotone and is exact on cones (f = c t).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config.quad_config import QuadSpec
from geom.chart import AmbientPoint, Submanifold
from quad.integrator import EntropyValue, ball_volume, parallel_map
from verify.special import gamma_tail_fraction, half_integer_gamma, incomplete_gamma_upper

logger = logging.getLogger(__name__)

# Floor for comparisons that are exact in exact arithmetic
EXACT_FLOOR = 1e-12
MAX_DIM = 10


class ProfileError(ValueError):
    """Profile data that breaks monotonicity beyond slack, or a radius outside the sampled range."""


def unit_ball_volume(n: int) -> float:
    """omega_n = pi^{n/2} / Gamma(n/2 + 1) for 1 <= n <= 10."""
    if isinstance(n, bool) or int(n) != n or not 1 <= n <= MAX_DIM:
        raise ValueError(f"unit_ball_volume needs an integer 1 <= n <= {MAX_DIM}, got {n}")
    return math.pi ** (0.5 * n) / half_integer_gamma(0.5 * n + 1.0)


@dataclass(frozen=True)
class RadialProfile:
    """Samples f_i = Vol(B(y0, r_i) ∩ M) with per-sample error bounds."""

    center: AmbientPoint
    radii: np.ndarray
    values: np.ndarray
    bounds: np.ndarray
    n: int
    label: str = "M"
    eps: float = 1e-9
    converged: bool = True

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        values = np.asarray(self.values, dtype=float)
        bounds = np.asarray(self.bounds, dtype=float)
        if radii.ndim != 1 or radii.size == 0:
            raise ProfileError("A profile needs at least one radius")
        if values.shape != radii.shape or bounds.shape != radii.shape:
            raise ProfileError("radii, values and bounds must have the same length")
        if np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
            raise ProfileError("Profile radii must be positive and strictly increasing")
        if np.any(bounds < 0) or not np.all(np.isfinite(values)):
            raise ProfileError("Profile values must be finite with non-negative bounds")
        unit_ball_volume(self.n)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "bounds", bounds)

    def __len__(self) -> int:
        return self.radii.size

    @property
    def omega(self) -> float:
        return unit_ball_volume(self.n)

    @property
    def t(self) -> np.ndarray:
        return self.radii ** self.n

    @property
    def ratios(self) -> np.ndarray:
        """Normalized density ratios f_i / (omega_n r_i^n)."""
        return self.values / (self.omega * self.t)

    @property
    def ratio_slack(self) -> np.ndarray:
        return self.bounds / (self.omega * self.t)

    def monotone_values(self) -> np.ndarray:
        return np.maximum.accumulate(self.values)


def validate_profile(p: RadialProfile, density: bool) -> None:
    """Raise ProfileError if f decreases, or (when density) f/r^n decreases, beyond slack."""
    f, b = p.values, p.bounds
    drops = f[:-1] - f[1:] - (b[:-1] + b[1:]) - EXACT_FLOOR
    if np.any(drops > 0):
        i = int(np.argmax(drops))
        raise ProfileError(
            f"Volume of {p.label} decreases from r={p.radii[i]:g} to r={p.radii[i + 1]:g} "
            f"({f[i]:.17g} -> {f[i + 1]:.17g}) beyond the quadrature bounds"
        )
    if not density:
        return
    ratios, slack = p.ratios, p.ratio_slack
    for i in range(len(p) - 1):
        excess = ratios[i] - ratios[i + 1:] - slack[i] - slack[i + 1:] - EXACT_FLOOR
        if np.any(excess > 0):
            j = i + 1 + int(np.argmax(excess))
            raise ProfileError(
                f"Density ratio of {p.label} drops from {ratios[i]:.12g} at r={p.radii[i]:g} "
                f"to {ratios[j]:.12g} at r={p.radii[j]:g}; quadrature failure or non-minimal surface"
            )


def merge_breakpoints(r_grid: Sequence[float], breakpoints: Sequence[float]) -> np.ndarray:
    """r_grid with the breakpoints below its last radius added, sorted.

    A breakpoint is a radius where f has a kink (the ball first touching a
    flat piece, say). The interpolant is only piecewise linear in t between
    samples, so a kink needs a sample of its own. Breakpoints within 1e-12
    relative of an existing radius are dropped.
    """
    radii = np.asarray(r_grid, dtype=float)
    if radii.size == 0:
        return radii
    extra = [float(b) for b in breakpoints if 0.0 < b < radii[-1]]
    merged = np.sort(np.concatenate([radii, extra]))
    keep = np.concatenate([[True], np.diff(merged) > 1e-12 * merged[1:]])
    return merged[keep]


def build_profile(
    M: Submanifold,
    y0: AmbientPoint,
    r_grid: Sequence[float],
    spec: QuadSpec,
    workers: int = 1,
    validate_density: Optional[bool] = None,
) -> RadialProfile:
    """Sample ball volumes on r_grid and validate the monotonicity invariants.

    Args:
        validate_density: Check f/r^n monotonicity; defaults to M.declared_minimal.

    Raises:
        ProfileError: Bad grid or an invariant violated beyond the reported bounds.
    """
    radii = np.asarray(r_grid, dtype=float)
    if radii.ndim != 1 or radii.size == 0 or np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
        raise ProfileError("r grid must be positive and strictly increasing")
    volumes = parallel_map(lambda r: ball_volume(M, y0, float(r), spec), radii, workers)
    profile = RadialProfile(
        center=y0,
        radii=radii,
        values=np.array([v.value for v in volumes]),
        bounds=np.array([v.bound for v in volumes]),
        n=M.dim,
        label=M.label,
        eps=spec.eps,
        converged=all(v.converged for v in volumes),
    )
    cells = sum(v.cells for v in volumes)
    logger.info(f"Built profile of {M.label} on {len(radii)} radii in [{radii[0]:g}, {radii[-1]:g}] ({cells} cells)")
    if not profile.converged:
        logger.warning(f"Profile of {M.label} contains unconverged ball volumes")
    validate_profile(profile, M.declared_minimal if validate_density is None else validate_density)
    return profile


@dataclass(frozen=True)
class EavrEstimate:
    """EAVR value with bracket [low, high]; high is inf when no upper bound is available."""

    value: float
    low: float
    high: float
    converged: bool
    ratios: Tuple[float, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "low": self.low,
            "high": self.high if math.isfinite(self.high) else None,
            "converged": self.converged,
        }


def eavr_estimate(p: RadialProfile, rtol: float = 0.01) -> EavrEstimate:
    """Estimate lim f(r) / (omega_n r^n) from the last samples.

    value is the last ratio and low the largest ratio minus its slack. If the
    last three ratios are nondecreasing in r and concave in x = 1/r (within
    slack), the secant through the last two, extended to x = 0, is an upper
    bound; otherwise high = inf and the estimate is unconverged.

    Raises:
        ProfileError: Fewer than three samples.
    """
    if len(p) < 3:
        raise ProfileError(f"eavr_estimate needs at least 3 radii, got {len(p)}")
    ratios, slack = p.ratios, p.ratio_slack
    value = float(ratios[-1])
    low = min(float(np.max(ratios - slack)), value)

    x = 1.0 / p.radii[-3:]
    R = ratios[-3:]
    s = slack[-3:]
    s1 = (R[1] - R[0]) / (x[1] - x[0])
    s2 = (R[2] - R[1]) / (x[2] - x[1])
    sigma1 = (s[0] + s[1]) / (x[0] - x[1]) + EXACT_FLOOR
    sigma2 = (s[1] + s[2]) / (x[1] - x[2]) + EXACT_FLOOR
    monotone = s1 <= sigma1 and s2 <= sigma2
    concave = s2 >= s1 - (sigma1 + sigma2)
    if monotone and concave:
        high = max(R[2] - s2 * x[2], R[2]) + sigma2 * x[2] + s[2]
    else:
        high = math.inf
    converged = math.isfinite(high) and abs(R[2] - R[1]) < rtol * value
    logger.debug(f"eavr_estimate for {p.label}: value {value:.12g}, bracket [{low:.12g}, {high:.12g}], converged {converged}")
    return EavrEstimate(value, low, high, converged, tuple(float(v) for v in ratios))


def _augmented(p: RadialProfile) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """t, monotone f and bounds with the origin sample (0, 0, 0) prepended."""
    t = np.concatenate([[0.0], p.t])
    f = np.concatenate([[0.0], p.monotone_values()])
    b = np.concatenate([[0.0], p.bounds])
    return t, f, b


def interpolation_errors(t: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Per-segment bound on |f - linear interpolant| from neighbouring second divided differences."""
    segments = t.size - 1
    dd2 = np.zeros(max(0, t.size - 2))
    if t.size >= 3:
        slopes = np.diff(f) / np.diff(t)
        dd2 = np.abs(np.diff(slopes) / (t[2:] - t[:-2]))
    curvature = np.zeros(segments)
    for k in range(segments):
        nearby = [dd2[j] for j in (k - 1, k) if 0 <= j < dd2.size]
        curvature[k] = max(nearby) if nearby else 0.0
    # |f''| ~ 2 dd2; linear interpolation error <= dt^2 |f''| / 8
    return np.diff(t) ** 2 * curvature / 4.0


def entropy_from_profile(p: RadialProfile, tau: float, eps: Optional[float] = None, eavr: Optional[EavrEstimate] = None) -> EntropyValue:
    """H(tau) from the profile: exact Gaussian integral of the interpolant plus a tail.

    Inside r_K the integral of w(s) df(s), w(s) = (4 pi tau)^{-n/2} e^{-s^2/4tau},
    is evaluated segment by segment with incomplete gamma functions. Beyond r_K
    f grows like theta omega_n s^n, contributing theta Gamma(n/2, eta_K)/Gamma(n/2)
    with eta_K = r_K^2 / 4tau.

    The bracket is [no-tail, with-tail] widened by the interpolation and
    volume error: low omits the tail, high adds it with theta = the EAVR
    upper bracket (twice the largest ratio when that is inf). The reported
    value is not the no-tail integral: it adds the tail with theta = the EAVR
    value, so it stays inside the bracket and is exact on cones at every tau.
    converged requires the with-tail part to be below eps·value.
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    eps = p.eps if eps is None else eps
    n = p.n
    if eavr is None:
        eavr = eavr_estimate(p) if len(p) >= 3 else EavrEstimate(float(p.ratios[-1]), float(p.ratios[-1]), math.inf, False)
    t, f, b = _augmented(p)
    r = np.concatenate([[0.0], p.radii])
    eta = r * r / (4.0 * tau)
    norm = (4.0 * math.pi * tau) ** (-0.5 * n)

    e_seg = norm * (np.exp(-eta[:-1]) - np.exp(-eta[1:]))
    upper = incomplete_gamma_upper(0.5 * n + 1.0, eta)
    g_seg = math.pi ** (-0.5 * n) * (upper[:-1] - upper[1:])
    slopes = np.diff(f) / np.diff(t)
    segment = f[:-1] * e_seg + slopes * (g_seg - t[:-1] * e_seg)
    w_last = norm * math.exp(-eta[-1])
    no_tail = w_last * f[-1] + float(np.sum(segment))

    delta = np.maximum(b[:-1], b[1:])
    err = float(np.sum((interpolation_errors(t, f) + delta) * e_seg)) + w_last * b[-1]

    frac = float(gamma_tail_fraction(0.5 * n, eta[-1]))
    theta_high = eavr.high if math.isfinite(eavr.high) else 2.0 * float(np.max(p.ratios))
    tail_high = theta_high * frac
    value = no_tail + eavr.value * frac
    low = no_tail - err
    high = no_tail + tail_high + err
    converged = p.converged and tail_high <= eps * abs(value)
    bound = max(value - low, high - value)
    return EntropyValue(float(tau), value, bound, converged, low, high)


def entropy_curve(
    p: RadialProfile,
    tau_grid: Sequence[float],
    eps: Optional[float] = None,
    eavr: Optional[EavrEstimate] = None,
    workers: int = 1,
) -> List[EntropyValue]:
    """entropy_from_profile at each tau, sharing one EAVR estimate."""
    if eavr is None and len(p) >= 3:
        eavr = eavr_estimate(p)
    return parallel_map(lambda tau: entropy_from_profile(p, float(tau), eps, eavr), tau_grid, workers)


def _slope_at(p: RadialProfile, r_j: float) -> float:
    t = p.t
    f = p.monotone_values()
    tj = r_j ** p.n
    k = int(np.searchsorted(t, tj))
    if len(p) == 1:
        return f[0] / t[0]
    if k < len(p) and math.isclose(t[k], tj, rel_tol=1e-12, abs_tol=0.0):
        lo, hi = max(0, k - 1), min(len(p) - 1, k + 1)
        return (f[hi] - f[lo]) / (t[hi] - t[lo])
    if k > 0 and math.isclose(t[k - 1], tj, rel_tol=1e-12, abs_tol=0.0):
        lo, hi = max(0, k - 2), min(len(p) - 1, k)
        return (f[hi] - f[lo]) / (t[hi] - t[lo])
    return (f[k] - f[k - 1]) / (t[k] - t[k - 1])


def blowdown(p: RadialProfile, r_j: float) -> Tuple[float, float]:
    """(f(r_j) / (omega_n r_j^n), A(r_j) / (n omega_n r_j^{n-1})) at a radius inside the profile.

    f is the monotone interpolant; A is f' by finite differences in t = r^n,
    central at samples and the segment slope between them.

    Raises:
        ProfileError: r_j outside [r_1, r_K].
    """
    lo, hi = float(p.radii[0]), float(p.radii[-1])
    if not (lo * (1 - 1e-12) <= r_j <= hi * (1 + 1e-12)):
        raise ProfileError(f"r_j={r_j:g} lies outside the profile range [{lo:g}, {hi:g}]")
    r_j = min(max(r_j, lo), hi)
    tj = r_j ** p.n
    volume = float(np.interp(tj, p.t, p.monotone_values()))
    omega = p.omega
    return volume / (omega * tj), _slope_at(p, r_j) / omega


def shell_ratios(p: RadialProfile) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Central-difference shell ratios at interior samples with their slack.

    Returns:
        (indices, ratios, slack) where slack covers the mismatch between the
        two one-sided differences and the volume bounds.
    """
    if len(p) < 3:
        return np.zeros(0, dtype=int), np.zeros(0), np.zeros(0)
    t, f, b = p.t, p.monotone_values(), p.bounds
    omega = p.omega
    idx = np.arange(1, len(p) - 1)
    central = (f[idx + 1] - f[idx - 1]) / (t[idx + 1] - t[idx - 1]) / omega
    forward = (f[idx + 1] - f[idx]) / (t[idx + 1] - t[idx]) / omega
    backward = (f[idx] - f[idx - 1]) / (t[idx] - t[idx - 1]) / omega
    slack = 0.5 * np.abs(forward - backward) + (b[idx + 1] + b[idx - 1]) / ((t[idx + 1] - t[idx - 1]) * omega)
    return idx, central, slack
