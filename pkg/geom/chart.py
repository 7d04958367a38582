"""
Chart Module for mce.

This module defines the parametrized patches every surface is built from:
an ImmersionChart maps a parameter box in R^n into R^(n+m) and supplies the
exact value, Jacobian and Hessian of the map. A Submanifold is a finite
collection of charts sharing dimensions, and an AmbientPoint is a finite
point of the ambient Euclidean space.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

# Gram determinants at or below this value are treated as rank deficient
GRAM_TOLERANCE = 1e-14


class ChartError(ValueError):
    """Raised when a chart or submanifold is constructed inconsistently."""


class DegenerateChartError(ChartError):
    """Raised when DX(u) loses rank at an evaluated parameter point."""

    def __init__(self, label: str, u: Sequence[float], gram_det: float):
        self.label = label
        self.u = tuple(float(x) for x in np.atleast_1d(u))
        self.gram_det = float(gram_det)
        coords = ", ".join(f"{x:.17g}" for x in self.u)
        super().__init__(
            f"Chart '{label}' is degenerate at u=({coords}): Gram determinant {self.gram_det:.3e} "
            f"<= {GRAM_TOLERANCE:g}"
        )


@dataclass(frozen=True)
class Axis:
    """One parameter axis of a chart domain. None marks an unbounded side."""

    lo: Optional[float] = None
    hi: Optional[float] = None
    periodic: bool = False

    def __post_init__(self):
        if self.periodic and (self.lo is None or self.hi is None):
            raise ChartError("Periodic axes need finite bounds")
        if self.lo is not None and self.hi is not None and not self.lo < self.hi:
            raise ChartError(f"Axis bounds must satisfy lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def bounded(self) -> bool:
        return self.lo is not None and self.hi is not None

    def __str__(self) -> str:
        lo = "-inf" if self.lo is None else f"{self.lo:g}"
        hi = "inf" if self.hi is None else f"{self.hi:g}"
        suffix = " (periodic)" if self.periodic else ""
        return f"[{lo}, {hi}]{suffix}"


@dataclass(frozen=True)
class ChartJet:
    """Value, Jacobian and (optionally) Hessian of a chart at a batch of points.

    Shapes for a batch of leading shape S: value S+(N,), jacobian S+(N, n),
    hessian S+(N, n, n).
    """

    value: np.ndarray
    jacobian: np.ndarray
    hessian: Optional[np.ndarray] = None


class ImmersionChart(ABC):
    """Base interface for parametrized patches with exact 2-jets."""

    def __init__(self, label: str, axes: Sequence[Axis], ambient_dim: int):
        if not axes:
            raise ChartError("A chart needs at least one parameter axis")
        if ambient_dim <= len(axes):
            raise ChartError(
                f"Ambient dimension {ambient_dim} must exceed parameter dimension {len(axes)}"
            )
        self.label = label
        self.axes: Tuple[Axis, ...] = tuple(axes)
        self.ambient_dim = int(ambient_dim)

    @property
    def dim(self) -> int:
        return len(self.axes)

    @abstractmethod
    def jet(self, u: np.ndarray, order: int = 2) -> ChartJet:
        """Evaluate the chart at parameter points.

        Args:
            u: Array of shape (n,) or (..., n).
            order: 1 for value and Jacobian, 2 to include the Hessian.

        Returns:
            ChartJet with arrays shaped after the leading shape of u.
        """
        pass

    def truncation_box(self, radius: float) -> Optional[np.ndarray]:
        """Parameter box containing every u with |X(u)| <= radius.

        Only the unbounded axes of the result are used. The default policy
        assumes |X(u)| >= |u_i| on every unbounded axis; subclasses with
        sharper growth estimates override this.

        Returns:
            Array of shape (n, 2), or None when no parameter maps inside the ball.
        """
        return np.array([[-radius, radius]] * self.dim, dtype=float)

    def parameter_box(self, radius: Optional[float] = None) -> Optional[np.ndarray]:
        """Finite integration box: the domain, truncated to ambient radius when needed.

        Returns:
            Array of shape (n, 2), or None when the box is empty.
        """
        box = np.array(
            [[-math.inf if a.lo is None else a.lo, math.inf if a.hi is None else a.hi] for a in self.axes],
            dtype=float,
        )
        if radius is not None and not all(a.bounded for a in self.axes):
            limits = self.truncation_box(radius)
            if limits is None:
                return None
            for i, axis in enumerate(self.axes):
                if axis.bounded:
                    continue
                box[i, 0] = max(box[i, 0], limits[i, 0])
                box[i, 1] = min(box[i, 1], limits[i, 1])
        if not np.all(np.isfinite(box)):
            raise ChartError(f"Chart '{self.label}' has an unbounded axis and no truncation radius")
        if np.any(box[:, 1] <= box[:, 0]):
            return None
        return box

    def sample_box(self, window: float) -> np.ndarray:
        """Finite box used for pointwise sampling; unbounded sides are cut at the window."""
        rows = []
        for axis in self.axes:
            if axis.bounded:
                rows.append([axis.lo, axis.hi])
            elif axis.lo is not None:
                rows.append([axis.lo, axis.lo + 2.0 * window])
            elif axis.hi is not None:
                rows.append([axis.hi - 2.0 * window, axis.hi])
            else:
                rows.append([-window, window])
        return np.array(rows, dtype=float)

    def point(self, u: Sequence[float]) -> np.ndarray:
        """Image X(u) of a single parameter point."""
        return self.jet(np.asarray(u, dtype=float), order=1).value

    def __repr__(self) -> str:
        axes = " x ".join(str(a) for a in self.axes)
        return f"{type(self).__name__}(label={self.label!r}, domain={axes}, ambient_dim={self.ambient_dim})"


@dataclass(frozen=True)
class Submanifold:
    """Finite union of charts covering M up to measure zero."""

    charts: Tuple[ImmersionChart, ...]
    label: str = "M"
    declared_minimal: bool = True

    def __post_init__(self):
        object.__setattr__(self, "charts", tuple(self.charts))
        if not self.charts:
            raise ChartError("A submanifold needs at least one chart")
        dims = {c.dim for c in self.charts}
        ambient = {c.ambient_dim for c in self.charts}
        if len(dims) != 1 or len(ambient) != 1:
            raise ChartError(
                f"Charts of '{self.label}' disagree on dimensions: n={sorted(dims)}, ambient={sorted(ambient)}"
            )

    @property
    def dim(self) -> int:
        return self.charts[0].dim

    @property
    def ambient_dim(self) -> int:
        return self.charts[0].ambient_dim

    @property
    def codim(self) -> int:
        return self.ambient_dim - self.dim


@dataclass(frozen=True)
class AmbientPoint:
    """A point of R^(n+m) with finite coordinates."""

    coords: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        coords = tuple(float(x) for x in self.coords)
        if not coords:
            raise ChartError("An ambient point needs at least one coordinate")
        if not all(math.isfinite(x) for x in coords):
            raise ChartError(f"Ambient point has non-finite coordinates: {coords}")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def origin(cls, ambient_dim: int) -> "AmbientPoint":
        return cls(tuple([0.0] * ambient_dim))

    @classmethod
    def parse(cls, text: str, ambient_dim: Optional[int] = None) -> "AmbientPoint":
        """Parse a comma-separated coordinate list such as "0,0,1"."""
        try:
            coords: List[float] = [float(part) for part in text.split(",")]
        except ValueError:
            raise ChartError(f"Cannot parse ambient point '{text}': expected comma-separated numbers")
        if ambient_dim is not None and len(coords) != ambient_dim:
            raise ChartError(f"Ambient point '{text}' has {len(coords)} coordinates, expected {ambient_dim}")
        return cls(tuple(coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.array))

    def is_origin(self) -> bool:
        return all(x == 0.0 for x in self.coords)

    def __str__(self) -> str:
        return ",".join(f"{x:g}" for x in self.coords)
