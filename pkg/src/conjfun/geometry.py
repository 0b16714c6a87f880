"""Computational domains and surface charts.

A :class:`DomainSpec` describes a multiply connected quadrilateral in the
parameter plane: a positively oriented outer chain of curve segments, four
corner points on it, hole boundaries and slits. A :class:`SurfaceChart` lifts
the parameter plane to a surface in R^3 and supplies the first fundamental
form used by the Laplace-Beltrami assembly.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np


class GeometryError(ValueError):
    """Invalid or conflicting domain geometry."""


class InvalidParameterError(ValueError):
    pass


class ChartDomainError(ValueError):
    """A chart was evaluated outside the region where it is defined."""


class MetricDegenerateError(ArithmeticError):
    """The first fundamental form is singular at some point."""

    def __init__(self, msg: str, location=None):
        super().__init__(msg)
        self.location = location


# --------------------------------------------------------------------------
# surface charts
# --------------------------------------------------------------------------


class SurfaceChart:
    """Parameterisation ``(u, v) -> (x, y, z)`` with an analytic Jacobian.

    Parameters
    ----------
    x : callable
        Maps an ``(..., 2)`` array of parameter points to ``(..., 3)``.
    jacobian : callable
        Maps ``(..., 2)`` to the ``(..., 3, 2)`` Jacobian.
    name : str
        Identifier used in configs and reports.
    params : dict
        Parameters needed to rebuild the chart from a config.
    """

    is_identity = False

    def __init__(self, x: Callable, jacobian: Callable, name: str = "custom", params: dict | None = None):
        self._x = x
        self._jac = jacobian
        self.name = name
        self.params = dict(params or {})

    def __repr__(self):
        return f"{type(self).__name__}(name={self.name!r}, params={self.params})"

    def __call__(self, uv) -> np.ndarray:
        return self._x(np.asarray(uv, dtype=float))

    def jacobian(self, uv) -> np.ndarray:
        return self._jac(np.asarray(uv, dtype=float))

    def first_fundamental_form(self, uv) -> np.ndarray:
        J = self.jacobian(uv)
        return np.einsum("...ka,...kb->...ab", J, J)

    def metric_coefficient(self, uv) -> np.ndarray:
        """``G^-1 sqrt(det G)``, the planar coefficient of the surface problem."""
        uv = np.asarray(uv, dtype=float)
        G = self.first_fundamental_form(uv)
        det = G[..., 0, 0] * G[..., 1, 1] - G[..., 0, 1] * G[..., 1, 0]
        scale = G[..., 0, 0] + G[..., 1, 1]
        bad = ~(det > 1e-14 * scale * scale) | ~np.isfinite(det)
        if np.any(bad):
            loc = uv.reshape(-1, 2)[np.flatnonzero(bad.ravel())[0]]
            raise MetricDegenerateError(f"singular first fundamental form at {tuple(loc)}", tuple(loc))
        root = np.sqrt(det)
        C = np.empty_like(G)
        C[..., 0, 0] = G[..., 1, 1]
        C[..., 1, 1] = G[..., 0, 0]
        C[..., 0, 1] = -G[..., 0, 1]
        C[..., 1, 0] = -G[..., 1, 0]
        return C / root[..., None, None]

    def to_config(self) -> dict:
        return {"type": self.name, **self.params}


class IdentityChart(SurfaceChart):
    """The plane itself; assembly skips the metric entirely."""

    is_identity = True

    def __init__(self):
        def x(uv):
            return np.concatenate([uv, np.zeros(uv.shape[:-1] + (1,))], axis=-1)

        def jac(uv):
            J = np.zeros(uv.shape[:-1] + (3, 2))
            J[..., 0, 0] = 1.0
            J[..., 1, 1] = 1.0
            return J

        super().__init__(x, jac, name="plane")

    def metric_coefficient(self, uv) -> np.ndarray:
        uv = np.asarray(uv, dtype=float)
        return np.broadcast_to(np.eye(2), uv.shape[:-1] + (2, 2)).copy()


PLANE = IdentityChart()


def make_torus_chart(r: float = 0.5, R: float = 1.5) -> SurfaceChart:
    """Torus with tube radius ``r`` and outer (equatorial) radius ``R``.

    ``T(u, v) = ((R - r + r cos u) cos v, (R - r + r cos u) sin v, r sin u)``,
    which for ``(r, R) = (1/2, 3/2)`` is ``((cos u / 2 + 1) cos v, ...)``.
    """
    if not (r > 0 and R > 0):
        raise InvalidParameterError(f"torus radii must be positive, got r={r}, R={R}")
    if not r < R:
        raise InvalidParameterError(f"torus needs r < R, got r={r}, R={R}")
    c = R - r

    def x(uv):
        u, v = uv[..., 0], uv[..., 1]
        rho = c + r * np.cos(u)
        return np.stack([rho * np.cos(v), rho * np.sin(v), r * np.sin(u)], axis=-1)

    def jac(uv):
        u, v = uv[..., 0], uv[..., 1]
        rho = c + r * np.cos(u)
        J = np.empty(uv.shape[:-1] + (3, 2))
        J[..., 0, 0] = -r * np.sin(u) * np.cos(v)
        J[..., 1, 0] = -r * np.sin(u) * np.sin(v)
        J[..., 2, 0] = r * np.cos(u)
        J[..., 0, 1] = -rho * np.sin(v)
        J[..., 1, 1] = rho * np.cos(v)
        J[..., 2, 1] = 0.0
        return J

    return SurfaceChart(x, jac, name="torus", params={"r": r, "R": R})


def make_hemisphere_chart(rect: Sequence[float]) -> SurfaceChart:
    """Lift the rectangle ``(xmin, ymin, xmax, ymax)`` onto the sphere
    through its four corners.

    The sphere is centred at the rectangle centre with radius equal to the
    half diagonal, so the corners land on the equator ``z = 0``.
    """
    xmin, ymin, xmax, ymax = map(float, rect)
    if not (xmax > xmin and ymax > ymin):
        raise InvalidParameterError(f"degenerate rectangle {rect}")
    cx, cy = 0.5 * (xmin + xmax), 0.5 * (ymin + ymax)
    R2 = (xmax - cx) ** 2 + (ymax - cy) ** 2

    def height(uv):
        h2 = R2 - (uv[..., 0] - cx) ** 2 - (uv[..., 1] - cy) ** 2
        # corners sit on the rim; allow them up to rounding
        if np.any(h2 < -1e-12 * R2):
            k = np.flatnonzero((h2 < -1e-12 * R2).ravel())[0]
            raise ChartDomainError(f"point {tuple(uv.reshape(-1, 2)[k])} outside the hemisphere disk")
        return np.sqrt(np.maximum(h2, 0.0))

    def x(uv):
        return np.concatenate([uv, height(uv)[..., None]], axis=-1)

    def jac(uv):
        z = height(uv)
        J = np.zeros(uv.shape[:-1] + (3, 2))
        J[..., 0, 0] = 1.0
        J[..., 1, 1] = 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            J[..., 2, 0] = -(uv[..., 0] - cx) / z
            J[..., 2, 1] = -(uv[..., 1] - cy) / z
        return J

    return SurfaceChart(x, jac, name="hemisphere", params={"rect": [xmin, ymin, xmax, ymax]})


def metric_coefficient(chart: SurfaceChart, p) -> np.ndarray:
    return chart.metric_coefficient(p)


_CUSTOM_CHARTS: dict[str, Callable[..., SurfaceChart]] = {}


def register_chart(name: str, factory: Callable[..., SurfaceChart]) -> None:
    """Make ``{"type": "custom", "name": name}`` resolvable in configs."""
    _CUSTOM_CHARTS[name] = factory


def chart_from_config(cfg: dict | None, bbox=None) -> SurfaceChart:
    if not cfg:
        return PLANE
    kind = cfg.get("type", "plane")
    if kind == "plane":
        return PLANE
    if kind == "torus":
        return make_torus_chart(cfg.get("r", 0.5), cfg.get("R", 1.5))
    if kind == "hemisphere":
        rect = cfg.get("rect", bbox)
        if rect is None:
            raise GeometryError("hemisphere chart needs a rectangle")
        return make_hemisphere_chart(rect)
    if kind == "custom":
        name = cfg["name"]
        if name not in _CUSTOM_CHARTS:
            raise GeometryError(f"unknown custom chart {name!r}")
        args = {k: v for k, v in cfg.items() if k not in ("type", "name")}
        return _CUSTOM_CHARTS[name](**args)
    raise GeometryError(f"unknown chart type {kind!r}")


# --------------------------------------------------------------------------
# curves and domains
# --------------------------------------------------------------------------


@dataclass
class CurveSegment:
    """One piece of a boundary chain.

    ``kind`` is ``"polyline"`` (``points``), ``"arc"`` (``center``, ``radius``,
    ``theta0``, ``theta1``; counterclockwise when ``theta1 > theta0``) or
    ``"parametric"`` (``func`` mapping ``t in [0, 1]`` to a point).
    """

    kind: str
    points: np.ndarray | None = None
    center: tuple[float, float] | None = None
    radius: float | None = None
    theta0: float | None = None
    theta1: float | None = None
    func: Callable | None = None

    def __post_init__(self):
        if self.kind == "polyline":
            pts = np.asarray(self.points, dtype=float)
            if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
                raise GeometryError("polyline needs at least two points")
            if np.any(np.linalg.norm(np.diff(pts, axis=0), axis=1) == 0):
                raise GeometryError("polyline has repeated consecutive points")
            self.points = pts
        elif self.kind == "arc":
            if self.radius is None or not self.radius > 0:
                raise GeometryError(f"arc radius must be positive, got {self.radius}")
            if self.theta0 == self.theta1:
                raise GeometryError("arc has zero sweep")
            self.center = (float(self.center[0]), float(self.center[1]))
        elif self.kind == "parametric":
            if not callable(self.func):
                raise GeometryError("parametric segment needs a callable")
        else:
            raise GeometryError(f"unknown segment kind {self.kind!r}")

    @property
    def orientation(self) -> int:
        if self.kind == "arc":
            return 1 if self.theta1 > self.theta0 else -1
        return 1

    def point(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "arc":
            th = self.theta0 + t * (self.theta1 - self.theta0)
            return np.stack([self.center[0] + self.radius * np.cos(th), self.center[1] + self.radius * np.sin(th)], -1)
        if self.kind == "parametric":
            return np.asarray(self.func(t), dtype=float)
        raise GeometryError("point(t) is not defined for polylines")

    @property
    def start(self) -> np.ndarray:
        return self.points[0] if self.kind == "polyline" else self.point(0.0)

    @property
    def end(self) -> np.ndarray:
        return self.points[-1] if self.kind == "polyline" else self.point(1.0)

    def discretize(self, h: float, min_pieces: int = 1):
        """Points along the segment, start included and end excluded.

        Returns ``(points, arcs)`` where ``arcs[k]`` is ``None`` for a straight
        piece ``k`` or ``(cx, cy, radius, theta_start, theta_end)``.
        """
        if self.kind == "polyline":
            out, arcs = [], []
            for a, b in zip(self.points[:-1], self.points[1:]):
                n = max(1, math.ceil(np.linalg.norm(b - a) / h - 1e-9))
                t = np.arange(n) / n
                out.append(a + t[:, None] * (b - a))
                arcs += [None] * n
            return np.vstack(out), arcs
        if self.kind == "arc":
            length = self.radius * abs(self.theta1 - self.theta0)
            n = max(min_pieces, math.ceil(length / h - 1e-9))
            t = np.arange(n) / n
            pts = self.point(t)
            th = self.theta0 + np.arange(n + 1) / n * (self.theta1 - self.theta0)
            arcs = [(self.center[0], self.center[1], self.radius, th[k], th[k + 1]) for k in range(n)]
            return pts, arcs
        dense = self.point(np.linspace(0.0, 1.0, 257))
        length = np.sum(np.linalg.norm(np.diff(dense, axis=0), axis=1))
        n = max(min_pieces, math.ceil(length / h - 1e-9))
        return self.point(np.arange(n) / n), [None] * n

    def to_config(self) -> dict:
        if self.kind == "polyline":
            return {"kind": "polyline", "points": self.points.tolist()}
        if self.kind == "arc":
            return {"kind": "arc", "center": list(self.center), "radius": self.radius,
                    "theta0": self.theta0, "theta1": self.theta1}
        raise GeometryError("parametric segments cannot be serialised")

    @classmethod
    def from_config(cls, cfg: dict) -> "CurveSegment":
        kind = cfg["kind"]
        if kind == "polyline":
            return cls("polyline", points=cfg["points"])
        if kind == "arc":
            return cls("arc", center=tuple(cfg["center"]), radius=cfg["radius"],
                       theta0=cfg["theta0"], theta1=cfg["theta1"])
        raise GeometryError(f"segment kind {kind!r} is not available in configs")


def circle(center, radius, clockwise=False) -> list[CurveSegment]:
    """A full circle as four quarter arcs."""
    s = -1.0 if clockwise else 1.0
    return [CurveSegment("arc", center=center, radius=radius,
                         theta0=s * k * math.pi / 2, theta1=s * (k + 1) * math.pi / 2) for k in range(4)]


def polygon(points) -> list[CurveSegment]:
    """A closed polygon, one straight segment per side."""
    pts = np.asarray(points, dtype=float)
    return [CurveSegment("polyline", points=[pts[k], pts[(k + 1) % len(pts)]]) for k in range(len(pts))]


def _chain_points(chain: Sequence[CurveSegment], h: float) -> np.ndarray:
    return np.vstack([seg.discretize(h, 2)[0] for seg in chain])


def _signed_area(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segments_cross(a0, a1, b0, b1, touch_ok=False):
    """Vectorised proper/improper intersection test of segment sets."""

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])

    a0, a1 = a0[:, None], a1[:, None]
    b0, b1 = b0[None], b1[None]
    d1 = orient(b0, b1, a0)
    d2 = orient(b0, b1, a1)
    d3 = orient(a0, a1, b0)
    d4 = orient(a0, a1, b1)
    scale = 1e-12 * max(1.0, float(np.abs(np.concatenate([a0.ravel(), b0.ravel()])).max()) ** 2)
    proper = (d1 * d2 < -scale ** 2) & (d3 * d4 < -scale ** 2)
    if touch_ok:
        return proper
    near = (np.abs(d1) <= scale) | (np.abs(d2) <= scale) | (np.abs(d3) <= scale) | (np.abs(d4) <= scale)
    lo = np.minimum(a0, a1)
    hi = np.maximum(a0, a1)
    blo = np.minimum(b0, b1)
    bhi = np.maximum(b0, b1)
    overlap = np.all((lo <= bhi + 1e-12) & (blo <= hi + 1e-12), axis=-1)
    return proper | (near & overlap & (d1 * d2 <= scale ** 2) & (d3 * d4 <= scale ** 2))


def _point_in_polygon(pts, poly) -> np.ndarray:
    pts = np.atleast_2d(pts)
    x, y = pts[:, 0:1], pts[:, 1:2]
    x0, y0 = poly[:, 0], poly[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    cond = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    return np.sum(cond & (x < xint), axis=1) % 2 == 1


@dataclass
class DomainSpec:
    """Multiply connected quadrilateral ``(Omega; z1, z2, z3, z4)``.

    Parameters
    ----------
    outer : list of CurveSegment
        Closed, counterclockwise chain.
    corners : 4 ints
        Indices of the outer segments whose start points are ``z1..z4``.
    holes : list of chains
        Each a closed chain (any orientation) bounding a hole.
    slits : list of (k, 2) arrays
        Open polylines; meshed as zero-area holes.
    chart : SurfaceChart
        Parameterisation of the surface; the plane by default.
    singular_points : list of points
        Extra vertices to grade towards.
    grade_corners : bool or None
        Force (True) or forbid (False) grading at ``z1..z4``; ``None`` flags
        only corners whose angle produces a singularity.
    """

    outer: list[CurveSegment]
    corners: tuple[int, int, int, int]
    holes: list[list[CurveSegment]] = field(default_factory=list)
    slits: list[np.ndarray] = field(default_factory=list)
    chart: SurfaceChart = PLANE
    singular_points: list = field(default_factory=list)
    grade_corners: bool | None = None
    name: str = "domain"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.slits = [np.asarray(s, dtype=float) for s in self.slits]
        self.corners = tuple(int(c) for c in self.corners)
        self.validate()

    @property
    def n_holes(self) -> int:
        """Number of inner boundary components (holes and slits)."""
        return len(self.holes) + len(self.slits)

    @property
    def corner_points(self) -> np.ndarray:
        return np.array([self.outer[c].start for c in self.corners])

    def bounding_box(self) -> tuple[float, float, float, float]:
        pts = _chain_points(self.outer, self._probe_h())
        return (float(pts[:, 0].min()), float(pts[:, 1].min()), float(pts[:, 0].max()), float(pts[:, 1].max()))

    def _probe_h(self) -> float:
        pts = np.vstack([s.start for s in self.outer])
        span = float(np.ptp(pts, axis=0).max()) if len(pts) > 1 else 1.0
        return max(span, 1e-9) / 64.0

    def validate(self) -> None:
        if len(self.outer) < 1:
            raise GeometryError("outer boundary is empty")
        for k, seg in enumerate(self.outer):
            nxt = self.outer[(k + 1) % len(self.outer)]
            if np.linalg.norm(seg.end - nxt.start) > 1e-10 * (1 + np.abs(seg.end).max()):
                raise GeometryError(f"outer chain is not closed between segments {k} and {(k + 1) % len(self.outer)}")
        if len(self.corners) != 4 or len(set(self.corners)) != 4:
            raise GeometryError("need four distinct corner segment indices")
        if any(not 0 <= c < len(self.outer) for c in self.corners):
            raise GeometryError("corner index out of range")
        # corners must appear in positive (cyclic) order
        c = list(self.corners)
        k = c.index(min(c))
        if c[k:] + c[:k] != sorted(c):
            raise GeometryError(f"corners {self.corners} are not in positive order")
        h = self._probe_h()
        outer_pts = _chain_points(self.outer, h)
        if _signed_area(outer_pts) <= 0:
            raise GeometryError("outer boundary must be counterclockwise")
        for i, hole in enumerate(self.holes):
            for k, seg in enumerate(hole):
                nxt = hole[(k + 1) % len(hole)]
                if np.linalg.norm(seg.end - nxt.start) > 1e-10 * (1 + np.abs(seg.end).max()):
                    raise GeometryError(f"hole {i} chain is not closed")
            pts = _chain_points(hole, h)
            if not np.all(_point_in_polygon(pts, outer_pts)):
                raise GeometryError(f"hole {i} is not inside the outer boundary")
        for j, s in enumerate(self.slits):
            if len(s) < 2 or np.linalg.norm(s[0] - s[-1]) == 0:
                raise GeometryError(f"slit {j} needs two distinct end points")
            if not np.all(_point_in_polygon(s, outer_pts)):
                raise GeometryError(f"slit {j} is not inside the outer boundary")
        self.check_conflicts(h)

    def labelled_pieces(self, h: float):
        """All boundary pieces as ``(labels, starts, ends)`` for conflict checks."""
        labels, a, b = [], [], []

        def add(chain_pts, name, closed):
            n = len(chain_pts)
            m = n if closed else n - 1
            for k in range(m):
                labels.append(name)
                a.append(chain_pts[k])
                b.append(chain_pts[(k + 1) % n])

        for k, seg in enumerate(self.outer):
            pts, _ = seg.discretize(h, 2)
            add(np.vstack([pts, seg.end]), f"outer[{k}]", False)
        for i, hole in enumerate(self.holes):
            for k, seg in enumerate(hole):
                pts, _ = seg.discretize(h, 2)
                add(np.vstack([pts, seg.end]), f"hole{i}[{k}]", False)
        for j, s in enumerate(self.slits):
            add(s, f"slit{j}", False)
        return labels, np.array(a), np.array(b)

    def check_conflicts(self, h: float | None = None) -> None:
        labels, a, b = self.labelled_pieces(h or self._probe_h())
        comp = np.array([lab.split("[")[0] for lab in labels])
        hit = _segments_cross(a, b, a, b)
        # consecutive pieces of one chain share end points
        n = len(labels)
        idx = np.arange(n)
        hit[idx, idx] = False
        same = comp[:, None] == comp[None, :]
        share = np.zeros_like(hit)
        for s0, s1 in ((a, a), (a, b), (b, a), (b, b)):
            share |= np.all(np.abs(s0[:, None] - s1[None]) < 1e-12, axis=-1)
        hit &= ~(same & share)
        if np.any(hit):
            i, j = np.argwhere(np.triu(hit, 1))[0]
            raise GeometryError(f"boundary pieces intersect: {labels[i]} and {labels[j]}")

    # ------------------------------------------------------------------
    # transformations and serialisation
    # ------------------------------------------------------------------

    def transformed(self, scale: float, rotation: float = 0.0, shift=(0.0, 0.0)) -> "DomainSpec":
        """Image under the similarity ``z -> scale * exp(i rotation) z + shift``."""
        c, s = math.cos(rotation), math.sin(rotation)
        A = scale * np.array([[c, -s], [s, c]])
        t = np.asarray(shift, dtype=float)

        def seg_t(seg):
            if seg.kind == "polyline":
                return CurveSegment("polyline", points=seg.points @ A.T + t)
            if seg.kind == "arc":
                cen = A @ np.asarray(seg.center) + t
                return CurveSegment("arc", center=tuple(cen), radius=scale * seg.radius,
                                    theta0=seg.theta0 + rotation, theta1=seg.theta1 + rotation)
            f = seg.func
            return CurveSegment("parametric", func=lambda tt: f(tt) @ A.T + t)

        if not self.chart.is_identity:
            raise GeometryError("only planar domains can be transformed")
        return DomainSpec(
            outer=[seg_t(s) for s in self.outer],
            corners=self.corners,
            holes=[[seg_t(s) for s in hole] for hole in self.holes],
            slits=[s @ A.T + t for s in self.slits],
            chart=self.chart,
            singular_points=[tuple(A @ np.asarray(p) + t) for p in self.singular_points],
            grade_corners=self.grade_corners,
            name=self.name,
            meta=dict(self.meta),
        )

    def to_config(self) -> dict:
        cfg = {
            "name": self.name,
            "outer": [s.to_config() for s in self.outer],
            "corners": list(self.corners),
            "holes": [[s.to_config() for s in hole] for hole in self.holes],
            "slits": [s.tolist() for s in self.slits],
            "chart": self.chart.to_config(),
        }
        if self.singular_points:
            cfg["singular"] = [list(map(float, p)) for p in self.singular_points]
        if self.grade_corners is not None:
            cfg["grade_corners"] = self.grade_corners
        cfg.update({k: v for k, v in self.meta.items() if k not in cfg})
        return cfg

    @classmethod
    def from_config(cls, cfg: dict, seed: int | None = None) -> "DomainSpec":
        """Build a domain from a config dictionary (see ``docs/config.md``)."""
        outer = [CurveSegment.from_config(s) for s in cfg["outer"]]
        if not outer:
            raise GeometryError("outer boundary is empty")
        holes = [[CurveSegment.from_config(s) for s in hole] for hole in cfg.get("holes", [])]
        slits = [np.asarray(s, dtype=float) for s in cfg.get("slits", [])]
        meta = {k: v for k, v in cfg.items()
                if k not in ("name", "outer", "corners", "holes", "slits", "chart", "singular", "grade_corners", "run")}
        if "random_slits" in cfg:
            rs = dict(cfg["random_slits"])
            if seed is not None:
                rs["seed"] = seed
                meta["random_slits"] = rs
            pts = np.vstack([s.start for s in outer])
            box = (pts[:, 0].min(), pts[:, 1].min(), pts[:, 0].max(), pts[:, 1].max())
            slits += random_slits(rs["count"], rs["seed"], box, rs.get("length", (0.1, 0.25)), rs.get("margin", 0.1))
        bbox = None
        if "outer" in cfg:
            pts = np.vstack([s.start for s in outer] + [s.point(np.linspace(0, 1, 33)) for s in outer if s.kind == "arc"])
            bbox = (pts[:, 0].min(), pts[:, 1].min(), pts[:, 0].max(), pts[:, 1].max())
        chart = chart_from_config(cfg.get("chart"), bbox)
        return cls(outer=outer, corners=tuple(cfg["corners"]), holes=holes, slits=slits, chart=chart,
                   singular_points=[tuple(p) for p in cfg.get("singular", [])],
                   grade_corners=cfg.get("grade_corners"), name=cfg.get("name", "domain"), meta=meta)

    @classmethod
    def load(cls, path, seed: int | None = None) -> "DomainSpec":
        with open(Path(path)) as fh:
            return cls.from_config(json.load(fh), seed=seed)


def random_slits(count: int, seed: int, box, length=(0.1, 0.25), margin: float = 0.1, max_tries: int = 10000):
    """Deterministic random straight slits inside ``box``.

    Slit lengths are drawn as fractions of the box width; slits keep a
    clearance of ``margin`` (also a width fraction) from each other and from the
    box boundary.
    """
    rng = np.random.default_rng(seed)
    xmin, ymin, xmax, ymax = map(float, box)
    W = min(xmax - xmin, ymax - ymin)
    gap = margin * W
    out: list[np.ndarray] = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > max_tries:
            raise GeometryError(f"could not place {count} slits with clearance {margin}")
        L = rng.uniform(*length) * W
        th = rng.uniform(0.0, math.pi)
        c = rng.uniform([xmin + gap + L / 2, ymin + gap + L / 2], [xmax - gap - L / 2, ymax - gap - L / 2])
        d = 0.5 * L * np.array([math.cos(th), math.sin(th)])
        s = np.array([c - d, c + d])
        if all(_segment_distance(s, t) > gap for t in out):
            out.append(s)
    return out


def _segment_distance(s, t) -> float:
    def pt_seg(p, a, b):
        ab = b - a
        u = np.clip(np.dot(p - a, ab) / np.dot(ab, ab), 0.0, 1.0)
        return float(np.linalg.norm(p - a - u * ab))

    if _segments_cross(s[:1], s[1:], t[:1], t[1:])[0, 0]:
        return 0.0
    return min(pt_seg(s[0], *t), pt_seg(s[1], *t), pt_seg(t[0], *s), pt_seg(t[1], *s))
