"""
Analytic charts for the built-in surfaces.

Each chart returns exact jets and a truncation box derived from an explicit
lower bound on |X(u)|, so the quadrature never has to guess where an
unbounded chart leaves a ball.
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np

from geom.chart import Axis, ChartError, ChartJet, ImmersionChart

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


def _stack_vectors(*components: np.ndarray) -> np.ndarray:
    """Stack per-coordinate arrays into a trailing ambient axis."""
    return np.stack(np.broadcast_arrays(*components), axis=-1)


def _jacobian(*columns: np.ndarray) -> np.ndarray:
    """Assemble (..., N, n) from n column vectors shaped (..., N)."""
    return np.stack(columns, axis=-1)


def _hessian(rows) -> np.ndarray:
    """Assemble (..., N, n, n) from a nested list rows[i][j] of (..., N) arrays."""
    return np.stack([np.stack(row, axis=-1) for row in rows], axis=-2)


class LinearChart(ImmersionChart):
    """Affine n-plane X(u) = origin + B u with orthonormal columns B."""

    def __init__(self, label: str, origin: Sequence[float], basis: np.ndarray):
        basis = np.asarray(basis, dtype=float)
        origin = np.asarray(origin, dtype=float)
        if basis.ndim != 2 or basis.shape[0] != origin.shape[0]:
            raise ChartError(f"Basis shape {basis.shape} does not match origin of length {origin.shape[0]}")
        if not np.allclose(basis.T @ basis, np.eye(basis.shape[1]), atol=1e-12):
            raise ChartError(f"Basis of '{label}' must have orthonormal columns")
        super().__init__(label, [Axis() for _ in range(basis.shape[1])], basis.shape[0])
        self.origin = origin
        self.basis = basis

    def jet(self, u, order: int = 2) -> ChartJet:
        u = np.asarray(u, dtype=float)
        shape = u.shape[:-1]
        value = self.origin + u @ self.basis.T
        jacobian = np.broadcast_to(self.basis, shape + self.basis.shape)
        hessian = np.zeros(shape + self.basis.shape + (self.dim,)) if order >= 2 else None
        return ChartJet(value, jacobian, hessian)

    def truncation_box(self, radius: float) -> Optional[np.ndarray]:
        # |origin + B u| >= |u| - |origin|
        half = radius + float(np.linalg.norm(self.origin))
        return np.array([[-half, half]] * self.dim)


class CatenoidChart(ImmersionChart):
    """(cosh v cos u, cosh v sin u, v), u in [0, 2pi) periodic, v unbounded."""

    def __init__(self, label: str = "catenoid"):
        super().__init__(label, [Axis(0.0, TWO_PI, periodic=True), Axis()], 3)

    def jet(self, u, order: int = 2) -> ChartJet:
        u = np.asarray(u, dtype=float)
        a, v = u[..., 0], u[..., 1]
        ca, sa = np.cos(a), np.sin(a)
        ch, sh = np.cosh(v), np.sinh(v)
        zero = np.zeros_like(a)
        one = np.ones_like(a)
        value = _stack_vectors(ch * ca, ch * sa, v)
        jacobian = _jacobian(_stack_vectors(-ch * sa, ch * ca, zero), _stack_vectors(sh * ca, sh * sa, one))
        hessian = None
        if order >= 2:
            x_uu = _stack_vectors(-ch * ca, -ch * sa, zero)
            x_uv = _stack_vectors(-sh * sa, sh * ca, zero)
            x_vv = _stack_vectors(ch * ca, ch * sa, zero)
            hessian = _hessian([[x_uu, x_uv], [x_uv, x_vv]])
        return ChartJet(value, jacobian, hessian)

    def truncation_box(self, radius: float) -> Optional[np.ndarray]:
        # |X|^2 = cosh^2 v + v^2 >= max(cosh^2 v, v^2)
        if radius < 1.0:
            return None
        half = min(radius, math.acosh(radius))
        return np.array([[0.0, TWO_PI], [-half, half]])


class HelicoidChart(ImmersionChart):
    """(u cos v, u sin v, v), u and v unbounded."""

    def __init__(self, label: str = "helicoid"):
        super().__init__(label, [Axis(), Axis()], 3)

    def jet(self, u, order: int = 2) -> ChartJet:
        u = np.asarray(u, dtype=float)
        s, t = u[..., 0], u[..., 1]
        ct, st = np.cos(t), np.sin(t)
        zero = np.zeros_like(s)
        one = np.ones_like(s)
        value = _stack_vectors(s * ct, s * st, t)
        jacobian = _jacobian(_stack_vectors(ct, st, zero), _stack_vectors(-s * st, s * ct, one))
        hessian = None
        if order >= 2:
            x_ss = _stack_vectors(zero, zero, zero)
            x_st = _stack_vectors(-st, ct, zero)
            x_tt = _stack_vectors(-s * ct, -s * st, zero)
            hessian = _hessian([[x_ss, x_st], [x_st, x_tt]])
        return ChartJet(value, jacobian, hessian)

    def truncation_box(self, radius: float) -> Optional[np.ndarray]:
        # |X|^2 = u^2 + v^2
        return np.array([[-radius, radius], [-radius, radius]])


class EnneperChart(ImmersionChart):
    """(u - u^3/3 + u v^2, v - v^3/3 + v u^2, u^2 - v^2), u and v unbounded."""

    def __init__(self, label: str = "enneper"):
        super().__init__(label, [Axis(), Axis()], 3)

    def jet(self, u, order: int = 2) -> ChartJet:
        u = np.asarray(u, dtype=float)
        a, b = u[..., 0], u[..., 1]
        value = _stack_vectors(a - a ** 3 / 3.0 + a * b * b, b - b ** 3 / 3.0 + b * a * a, a * a - b * b)
        jacobian = _jacobian(
            _stack_vectors(1.0 - a * a + b * b, 2.0 * a * b, 2.0 * a),
            _stack_vectors(2.0 * a * b, 1.0 - b * b + a * a, -2.0 * b),
        )
        hessian = None
        if order >= 2:
            two = np.full_like(a, 2.0)
            zero = np.zeros_like(a)
            x_aa = _stack_vectors(-2.0 * a, 2.0 * b, two)
            x_ab = _stack_vectors(2.0 * b, 2.0 * a, zero)
            x_bb = _stack_vectors(2.0 * a, -2.0 * b, -two)
            hessian = _hessian([[x_aa, x_ab], [x_ab, x_bb]])
        return ChartJet(value, jacobian, hessian)

    def truncation_box(self, radius: float) -> Optional[np.ndarray]:
        # With rho = |u|: |X| >= rho^3/3 - rho >= rho^3/6 once rho^2 >= 6
        half = max(math.sqrt(6.0), (6.0 * radius) ** (1.0 / 3.0))
        return np.array([[-half, half], [-half, half]])


class SphereChart(ImmersionChart):
    """Round sphere center + a(sin t cos p, sin t sin p, cos t); t in [0, pi], p periodic."""

    def __init__(self, label: str = "sphere", radius: float = 1.0, center: Sequence[float] = (0.0, 0.0, 1.0)):
        if radius <= 0:
            raise ChartError(f"Sphere radius must be positive, got {radius}")
        super().__init__(label, [Axis(0.0, math.pi), Axis(0.0, TWO_PI, periodic=True)], 3)
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=float)

    def jet(self, u, order: int = 2) -> ChartJet:
        u = np.asarray(u, dtype=float)
        t, p = u[..., 0], u[..., 1]
        a = self.radius
        ct, st = np.cos(t), np.sin(t)
        cp, sp = np.cos(p), np.sin(p)
        zero = np.zeros_like(t)
        value = self.center + a * _stack_vectors(st * cp, st * sp, ct)
        jacobian = a * _jacobian(_stack_vectors(ct * cp, ct * sp, -st), _stack_vectors(-st * sp, st * cp, zero))
        hessian = None
        if order >= 2:
            x_tt = _stack_vectors(-st * cp, -st * sp, -ct)
            x_tp = _stack_vectors(-ct * sp, ct * cp, zero)
            x_pp = _stack_vectors(-st * cp, -st * sp, zero)
            hessian = a * _hessian([[x_tt, x_tp], [x_tp, x_pp]])
        return ChartJet(value, jacobian, hessian)


class GreatCircleArc(ImmersionChart):
    """Unit-speed arc cos(t + start) e_i + sin(t + start) e_j, t in [0, length]."""

    def __init__(self, label: str, ambient_dim: int, plane: Sequence[int], start: float, length: float):
        i, j = (int(k) for k in plane)
        if i == j or not (0 <= i < ambient_dim and 0 <= j < ambient_dim):
            raise ChartError(f"Arc plane {plane} is not a pair of distinct axes of R^{ambient_dim}")
        if not 0.0 < length <= TWO_PI + 1e-12:
            raise ChartError(f"Arc length must lie in (0, 2pi], got {length}")
        super().__init__(label, [Axis(0.0, float(length))], ambient_dim)
        self.plane = (i, j)
        self.start = float(start)
        self.length = float(length)

    def _embed(self, c: np.ndarray, s: np.ndarray) -> np.ndarray:
        out = np.zeros(c.shape + (self.ambient_dim,))
        out[..., self.plane[0]] = c
        out[..., self.plane[1]] = s
        return out

    def jet(self, u, order: int = 2) -> ChartJet:
        u = np.asarray(u, dtype=float)
        angle = u[..., 0] + self.start
        c, s = np.cos(angle), np.sin(angle)
        value = self._embed(c, s)
        jacobian = self._embed(-s, c)[..., None]
        hessian = self._embed(-c, -s)[..., None, None] if order >= 2 else None
        return ChartJet(value, jacobian, hessian)


class ConeChart(ImmersionChart):
    """Cone s * gamma(t) over a link chart gamma with unit-norm image; s in [0, inf)."""

    def __init__(self, label: str, link: ImmersionChart):
        if any(not a.bounded for a in link.axes):
            raise ChartError(f"Link chart '{link.label}' must have a bounded domain")
        super().__init__(label, [Axis(0.0, None)] + list(link.axes), link.ambient_dim)
        self.link = link

    def jet(self, u, order: int = 2) -> ChartJet:
        u = np.asarray(u, dtype=float)
        s = u[..., 0]
        inner = self.link.jet(u[..., 1:], order=order)
        value = s[..., None] * inner.value
        jacobian = np.concatenate([inner.value[..., None], s[..., None, None] * inner.jacobian], axis=-1)
        hessian = None
        if order >= 2:
            k = self.dim
            hessian = np.zeros(value.shape + (k, k))
            hessian[..., 0, 1:] = inner.jacobian
            hessian[..., 1:, 0] = inner.jacobian
            hessian[..., 1:, 1:] = s[..., None, None, None] * inner.hessian
        return ChartJet(value, jacobian, hessian)

    def truncation_box(self, radius: float) -> Optional[np.ndarray]:
        box = [[0.0, radius]] + [[a.lo, a.hi] for a in self.link.axes]
        return np.array(box, dtype=float)
