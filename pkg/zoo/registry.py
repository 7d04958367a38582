"""
Surface registry for mce.

make_surface builds a ZooEntry (charts plus any closed forms) from a name and
a parameter map; load_surface_spec reads the CLI surface syntax: a bare name,
an inline JSON document, or @path to a JSON file.
"""

import json
import logging
import math
import os
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from expr.errors import ExprError
from expr.evaluator import chart_from_expressions
from expr.parser import parse_immersion
from geom.chart import AmbientPoint, ChartError, ImmersionChart, Submanifold
from zoo.surfaces import (
    TWO_PI,
    CatenoidChart,
    ConeChart,
    EnneperChart,
    GreatCircleArc,
    HelicoidChart,
    LinearChart,
    SphereChart,
)

logger = logging.getLogger(__name__)

# Unit-norm tolerance for user-supplied cone links
LINK_NORM_TOL = 1e-10
LINK_CHECK_POINTS = 257


class SurfaceSpecError(ValueError):
    """Unknown surface name, bad parameters, or an unreadable surface-spec document."""


@dataclass(frozen=True)
class ZooEntry:
    """A built surface with optional closed-form entropy and EAVR about the origin."""

    name: str
    params: Dict[str, Any]
    surface: Submanifold
    entropy: Optional[Callable[[float], float]] = field(default=None, compare=False)
    eavr: Optional[float] = None
    is_cone: bool = False
    center: Optional[AmbientPoint] = None
    kinks: Optional[Callable[[AmbientPoint], Tuple[float, ...]]] = field(default=None, compare=False)

    @property
    def label(self) -> str:
        return self.surface.label

    def default_center(self) -> AmbientPoint:
        return self.center if self.center is not None else AmbientPoint.origin(self.surface.ambient_dim)

    def closed_form_entropy(self, tau: float, y0: Optional[AmbientPoint] = None) -> Optional[float]:
        """Closed-form H(tau) when known; closed forms are stated about the origin."""
        if self.entropy is None or (y0 is not None and not y0.is_origin()):
            return None
        return self.entropy(tau)

    def cone_about(self, y0: AmbientPoint) -> bool:
        """True when the surface is a cone with vertex y0 (all zoo cones have vertex 0)."""
        return self.is_cone and y0.is_origin()

    def profile_breakpoints(self, y0: AmbientPoint) -> Tuple[float, ...]:
        """Radii about y0 where Vol(B(y0, r) ∩ M) has a known kink."""
        return self.kinks(y0) if self.kinks is not None else ()


def _check_keys(name: str, params: Dict[str, Any], allowed) -> None:
    unknown = sorted(set(params) - set(allowed))
    if unknown:
        raise SurfaceSpecError(f"Surface '{name}' does not accept parameters {unknown}; allowed: {sorted(allowed)}")


def _int_param(params: Dict[str, Any], key: str, default: Optional[int], minimum: int) -> int:
    value = params.get(key, default)
    if value is None:
        raise SurfaceSpecError(f"Missing required parameter '{key}'")
    if isinstance(value, bool) or not float(value).is_integer():
        raise SurfaceSpecError(f"Parameter '{key}' must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise SurfaceSpecError(f"Parameter '{key}' must be >= {minimum}, got {value}")
    return value


def _float_param(params: Dict[str, Any], key: str, default: Optional[float], minimum: Optional[float] = None, strict: bool = False) -> float:
    value = params.get(key, default)
    if value is None:
        raise SurfaceSpecError(f"Missing required parameter '{key}'")
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise SurfaceSpecError(f"Parameter '{key}' must be a number, got {value!r}")
    if not math.isfinite(value):
        raise SurfaceSpecError(f"Parameter '{key}' must be finite")
    if minimum is not None and (value < minimum or (strict and value == minimum)):
        relation = ">" if strict else ">="
        raise SurfaceSpecError(f"Parameter '{key}' must be {relation} {minimum}, got {value}")
    return value


def _flat(name: str, n: int, ambient: int, d: float) -> ZooEntry:
    if ambient <= n:
        raise SurfaceSpecError(f"Ambient dimension {ambient} must exceed n={n}")
    origin = np.zeros(ambient)
    origin[-1] = d
    basis = np.eye(ambient)[:, :n]
    surface = Submanifold((LinearChart(name, origin, basis),), name, True)

    def entropy(tau: float) -> float:
        return math.exp(-d * d / (4.0 * tau))

    def kinks(y0: AmbientPoint) -> Tuple[float, ...]:
        # The flat spans the first n axes; its normal space holds the last codim coordinates
        distance = float(np.linalg.norm((y0.array - origin)[-surface.codim:]))
        return (distance,) if distance > 0.0 else ()

    return ZooEntry(name, {"n": n, "ambient": ambient, "d": d}, surface, entropy, 1.0, d == 0.0, kinks=kinks)


def _make_line(params):
    _check_keys("line", params, ("ambient", "d"))
    ambient = _int_param(params, "ambient", 2, 2)
    return _flat("line", 1, ambient, _float_param(params, "d", 0.0, 0.0))


def _make_plane(params):
    _check_keys("plane", params, ("n", "ambient"))
    n = _int_param(params, "n", 2, 1)
    return _flat("plane", n, _int_param(params, "ambient", n + 1, n + 1), 0.0)


def _make_offset_plane(params):
    _check_keys("offset_plane", params, ("n", "ambient", "d"))
    n = _int_param(params, "n", 2, 1)
    ambient = _int_param(params, "ambient", n + 1, n + 1)
    return _flat("offset_plane", n, ambient, _float_param(params, "d", 1.0, 0.0))


def _constant(value: float) -> Callable[[float], float]:
    return lambda tau: value


def _make_k_lines(params):
    _check_keys("k_lines", params, ("k",))
    k = _int_param(params, "k", 2, 1)
    charts = []
    for j in range(k):
        theta = math.pi * j / k
        charts.append(LinearChart(f"k_lines[{j}]", [0.0, 0.0], [[math.cos(theta)], [math.sin(theta)]]))
    surface = Submanifold(tuple(charts), f"k_lines(k={k})", True)
    return ZooEntry("k_lines", {"k": k}, surface, _constant(float(k)), float(k), True)


def _make_k_planes(params):
    _check_keys("k_planes", params, ("k",))
    k = _int_param(params, "k", 2, 1)
    charts = []
    for j in range(k):
        theta = math.pi * j / k
        basis = [[math.cos(theta), 0.0], [math.sin(theta), 0.0], [0.0, 1.0]]
        charts.append(LinearChart(f"k_planes[{j}]", [0.0, 0.0, 0.0], basis))
    surface = Submanifold(tuple(charts), f"k_planes(k={k})", True)
    return ZooEntry("k_planes", {"k": k}, surface, _constant(float(k)), float(k), True)


def _coordinate_planes(ambient: int) -> List[List[int]]:
    return [[i, j] for j in range(1, ambient) for i in range(j)]


def _arcs_for_length(length: float, ambient: int) -> List[Dict[str, Any]]:
    """Full great circles in distinct coordinate planes, then the remaining arc."""
    planes = _coordinate_planes(ambient)
    full = int(math.floor(length / TWO_PI + 1e-12))
    rest = length - full * TWO_PI
    if rest <= 1e-12:
        rest = 0.0
    needed = full + (1 if rest > 0.0 else 0)
    if needed > len(planes):
        raise SurfaceSpecError(
            f"link_length {length} needs {needed} great circles but R^{ambient} has only {len(planes)} coordinate planes"
        )
    arcs = [{"plane": planes[i], "start": 0.0, "length": TWO_PI} for i in range(full)]
    if rest > 0.0:
        arcs.append({"plane": planes[full], "start": 0.0, "length": rest})
    return arcs


def _expression_link(params: Dict[str, Any], ambient: int, link_dim: int) -> ImmersionChart:
    source = params["link_exprs"]
    domain = params.get("link_domain")
    if domain is None or len(domain) != link_dim:
        raise SurfaceSpecError(f"link_domain must give {link_dim} bounded [lo, hi] pair(s)")
    exprs = parse_immersion(source, link_dim, ambient)
    try:
        link = chart_from_expressions(exprs, domain, "link", source)
    except ChartError as e:
        raise SurfaceSpecError(f"Invalid link domain: {e}")
    box = link.parameter_box()
    grids = np.meshgrid(*[np.linspace(lo, hi, LINK_CHECK_POINTS) for lo, hi in box], indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=-1)
    norms = np.linalg.norm(link.jet(points, order=1).value, axis=-1)
    worst = float(np.max(np.abs(norms - 1.0)))
    if worst > LINK_NORM_TOL:
        raise SurfaceSpecError(f"Link image is not on the unit sphere: max ||gamma| - 1| = {worst:.3e}")
    return link


def _make_cone_over_link(params):
    _check_keys("cone_over_link", params, ("link_length", "arcs", "link_exprs", "link_domain", "n", "ambient"))
    n = _int_param(params, "n", 2, 2)
    ambient = _int_param(params, "ambient", n + 1, n + 1)
    sources = [key for key in ("link_length", "arcs", "link_exprs") if key in params]
    if len(sources) != 1:
        raise SurfaceSpecError("cone_over_link needs exactly one of link_length, arcs, link_exprs")

    if "link_exprs" in params:
        link = _expression_link(params, ambient, n - 1)
        surface = Submanifold((ConeChart("cone", link),), "cone_over_link(expr)", True)
        return ZooEntry("cone_over_link", dict(params), surface, None, None, True)

    if n != 2:
        raise SurfaceSpecError("Great-circle links describe cones with n = 2; use link_exprs for n > 2")
    if "link_length" in params:
        length = _float_param(params, "link_length", None, 0.0, strict=True)
        arcs = _arcs_for_length(length, ambient)
    else:
        arcs = params["arcs"]
        if not isinstance(arcs, list) or not arcs:
            raise SurfaceSpecError("arcs must be a non-empty list of {plane, start, length}")
    charts = []
    total = 0.0
    for index, arc in enumerate(arcs):
        try:
            link = GreatCircleArc(f"link[{index}]", ambient, arc["plane"], float(arc.get("start", 0.0)), float(arc["length"]))
        except (KeyError, TypeError, ChartError) as e:
            raise SurfaceSpecError(f"Invalid arc {arc!r}: {e}")
        total += link.length
        charts.append(ConeChart(f"cone[{index}]", link))
    surface = Submanifold(tuple(charts), f"cone_over_link(L={total:g})", True)
    value = total / TWO_PI
    return ZooEntry("cone_over_link", dict(params), surface, _constant(value), value, True)


def _make_simple(name: str, chart_type) -> Callable[[Dict[str, Any]], ZooEntry]:
    def build(params):
        _check_keys(name, params, ())
        return ZooEntry(name, {}, Submanifold((chart_type(name),), name, True))

    return build


def _make_sphere(params):
    _check_keys("sphere", params, ("radius", "center"))
    radius = _float_param(params, "radius", 1.0, 0.0, strict=True)
    center = params.get("center", [0.0, 0.0, radius])
    if not isinstance(center, (list, tuple)) or len(center) != 3:
        raise SurfaceSpecError(f"sphere center must be a list of 3 coordinates, got {center!r}")
    try:
        center = [float(x) for x in center]
    except (TypeError, ValueError):
        raise SurfaceSpecError(f"sphere center must be numeric, got {center!r}")
    if not all(math.isfinite(x) for x in center):
        raise SurfaceSpecError(f"sphere center must be finite, got {center!r}")
    chart = SphereChart("sphere", radius, center)
    return ZooEntry("sphere", {"radius": radius, "center": list(center)}, Submanifold((chart,), "sphere", False))


def _make_expr(params):
    _check_keys("expr", params, ("exprs", "n", "ambient", "domain", "periodic", "minimal", "label", "truncation"))
    if params.get("truncation", "coordinate") != "coordinate":
        raise SurfaceSpecError(f"Unsupported truncation policy {params['truncation']!r}; only 'coordinate' is available")
    source = params.get("exprs")
    if not isinstance(source, str):
        raise SurfaceSpecError("expr surfaces need an 'exprs' string")
    n = _int_param(params, "n", 2, 1)
    ambient = _int_param(params, "ambient", n + 1, n + 1)
    domain = params.get("domain", [[None, None]] * n)
    if len(domain) != n or any(len(pair) != 2 for pair in domain):
        raise SurfaceSpecError(f"domain must list {n} [lo, hi] pairs")
    label = str(params.get("label", "expr"))
    exprs = parse_immersion(source, n, ambient)
    try:
        chart = chart_from_expressions(exprs, domain, label, source, params.get("periodic"))
    except (ChartError, ValueError) as e:
        if isinstance(e, ExprError):
            raise
        raise SurfaceSpecError(f"Invalid expr domain: {e}")
    surface = Submanifold((chart,), label, bool(params.get("minimal", True)))
    return ZooEntry("expr", dict(params), surface)


def _make_graph_uv(params):
    _check_keys("graph_uv", params, ())
    entry = _make_expr({"exprs": "u; v; u*v", "n": 2, "ambient": 3, "minimal": False, "label": "graph_uv"})
    return ZooEntry("graph_uv", {}, entry.surface)


BUILDERS: Dict[str, Callable[[Dict[str, Any]], ZooEntry]] = {
    "line": _make_line,
    "k_lines": _make_k_lines,
    "plane": _make_plane,
    "offset_plane": _make_offset_plane,
    "k_planes": _make_k_planes,
    "cone_over_link": _make_cone_over_link,
    "catenoid": _make_simple("catenoid", CatenoidChart),
    "helicoid": _make_simple("helicoid", HelicoidChart),
    "enneper": _make_simple("enneper", EnneperChart),
    "expr": _make_expr,
    "sphere": _make_sphere,
    "graph_uv": _make_graph_uv,
}


def make_surface(name: str, params: Optional[Dict[str, Any]] = None) -> ZooEntry:
    """Build a zoo surface.

    Args:
        name: One of the registered surface names.
        params: Constructor parameters for that surface.

    Raises:
        SurfaceSpecError: Unknown name or invalid parameters.
        ExprError: For expr surfaces whose source does not parse.
    """
    params = dict(params or {})
    if name not in BUILDERS:
        raise SurfaceSpecError(f"Unknown surface '{name}'; known surfaces: {', '.join(sorted(BUILDERS))}")
    entry = BUILDERS[name](params)
    logger.debug(f"Built surface {entry.label} with {len(entry.surface.charts)} chart(s)")
    return entry


def load_surface_spec(text: str) -> ZooEntry:
    """Read a surface from a name, an inline JSON document, or @path.

    JSON documents look like {"name": ..., "params": {...}} or put parameters
    at the top level ({"name": "expr", "exprs": "...", "n": 2, ...}). An
    optional "center" list sets the default center for that surface.
    """
    text = text.strip()
    if text.startswith("@"):
        path = text[1:]
        if not os.path.exists(path):
            raise SurfaceSpecError(f"Surface spec file not found: {path}")
        with open(path, "r") as f:
            text = f.read().strip()
    if not text.startswith("{"):
        return make_surface(text, {})

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SurfaceSpecError(f"Surface spec is not valid JSON: {e}")
    if not isinstance(doc, dict) or "name" not in doc:
        raise SurfaceSpecError("Surface spec JSON must be an object with a 'name' field")
    params = dict(doc.get("params", {}))
    for key, value in doc.items():
        if key not in ("name", "params", "center"):
            params[key] = value
    entry = make_surface(doc["name"], params)
    if "center" in doc:
        try:
            center = AmbientPoint(tuple(doc["center"]))
        except (ChartError, TypeError) as e:
            raise SurfaceSpecError(f"Invalid center: {e}")
        if center.dim != entry.surface.ambient_dim:
            raise SurfaceSpecError(f"center has {center.dim} coordinates, surface lives in R^{entry.surface.ambient_dim}")
        entry = replace(entry, center=center)
    return entry
