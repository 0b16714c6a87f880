"""Moduli, reciprocal error, conformal map and the canonical slit domain."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from conjfun.fem.assembly import AssembledSystem, Solution, _subset_curved
from conjfun.fem.mapping import map_points
from conjfun.mesh import hole_index


class MapDomainError(ValueError):
    """A point lies outside the meshed domain."""


class ConsistencyWarning(UserWarning):
    pass


def modulus(sys: AssembledSystem, x) -> float:
    """Dirichlet energy ``x^T A x`` over all dofs, Dirichlet data included."""
    x = x.x if isinstance(x, Solution) else np.asarray(x, dtype=float)
    return float(x @ (sys.A @ x))


def reciprocal_error(M: float, M_conj: float) -> float:
    """``|M * M_conj - 1|``, zero for exact moduli of a quadrilateral and its conjugate."""
    if not (M > 0 and M_conj > 0):
        raise ValueError(f"moduli must be positive, got {M}, {M_conj}")
    return abs(M * M_conj - 1.0)


@dataclass
class CanonicalDomain:
    """Rectangle ``[0, 1] x [0, h]`` minus horizontal slits ``zeta + [0, d]``."""

    h: float
    slits: list = field(default_factory=list)  # [(zeta_x, zeta_y), d]
    spread: list = field(default_factory=list)  # vertical spread of each sampled slit image

    def to_dict(self) -> dict:
        return {"h": self.h,
                "slits": [{"zeta": [float(z[0]), float(z[1])], "d": float(d)} for z, d in self.slits],
                "vertical_spread": [float(s) for s in self.spread]}


@dataclass
class ModulusReport:
    M: float
    M_conj: float
    delta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    canonical: CanonicalDomain | None = None

    @property
    def reci(self) -> float:
        return reciprocal_error(self.M, self.M_conj)

    @property
    def h(self) -> float:
        return self.M

    def to_dict(self) -> dict:
        out = {"M": self.M, "M_conj": self.M_conj, "reci": self.reci, "h": self.h,
               "h_from_conjugate": 1.0 / self.M_conj, "delta": [float(d) for d in self.delta]}
        if self.canonical is not None:
            out["canonical"] = self.canonical.to_dict()
        return out


class ConformalMap:
    """``Phi = (u, M * u~)`` from the primary and conjugate solutions.

    With the default ``origin="z2"`` the map preserves orientation and sends
    ``z1, z2, z3, z4`` to ``(0, M), (0, 0), (1, 0), (1, M)``. ``origin="z1"``
    uses ``(u, M (1 - u~))`` instead, which puts ``z1`` at the origin at the
    price of reversing orientation.
    """

    def __init__(self, u: Solution, u_conj: Solution, M: float, origin: str = "z2"):
        if origin not in ("z1", "z2"):
            raise ValueError("origin must be 'z1' or 'z2'")
        if u.mesh is not u_conj.mesh:
            raise ValueError("primary and conjugate solutions live on different meshes")
        self.u, self.u_conj, self.M, self.origin = u, u_conj, float(M), origin
        self.mesh = u.mesh

    def on_reference(self, elems, xi):
        """Images of reference points ``xi`` (``(n, 2)`` or ``(n, m, 2)``) in ``elems``.

        Returns ``(y, phi)``: parameter-plane points and their images.
        """
        a, _, y = self.u.evaluate_local(elems, xi)
        b, _, _ = self.u_conj.evaluate_local(elems, xi)
        v = self.M * (b if self.origin == "z2" else 1.0 - b)
        return y, np.stack([a, v], axis=-1)

    def locate(self, points, tol=1e-10, newton_steps=30):
        """Element and reference coordinates of parameter-plane points."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        mesh = self.mesh
        V = mesh.nodes[mesh.elements]
        J = np.stack([V[:, 1] - V[:, 0], V[:, 2] - V[:, 0]], axis=-1)
        Jinv = np.linalg.inv(J)
        curved_ids = set()
        for ids, _ in mesh.curved().values():
            curved_ids.update(ids.tolist())
        elems = np.full(len(pts), -1, dtype=np.int64)
        xis = np.zeros((len(pts), 2))
        for k, q in enumerate(pts):
            xi = np.einsum("tab,tb->ta", Jinv, q - V[:, 0])
            lam = np.column_stack([1 - xi.sum(1), xi])
            score = lam.min(axis=1)
            order = np.argsort(-score)[:8]
            for t in order:
                if t not in curved_ids:
                    if score[t] >= -tol:
                        elems[k], xis[k] = t, np.clip(xi[t], 0, 1)
                        break
                    continue
                z = self._newton(int(t), q, xi[t], newton_steps)
                if z is not None:
                    elems[k], xis[k] = t, z
                    break
            if elems[k] < 0:
                raise MapDomainError(f"point {tuple(q)} is outside the mesh")
        return elems, xis

    def _newton(self, t, q, xi, steps):
        mesh = self.mesh
        cur = _subset_curved(mesh, [t])
        z = np.clip(np.asarray(xi, dtype=float), 0.0, 1.0)
        for _ in range(steps):
            x, J = map_points(mesh.nodes, mesh.elements[[t]], z[None], cur)
            r = x[0, 0] - q
            z = z - np.linalg.solve(J[0, 0], r)
            if np.linalg.norm(r) < 1e-13 * (1 + np.linalg.norm(q)):
                break
        lam = np.array([1 - z.sum(), z[0], z[1]])
        if lam.min() < -1e-9:
            return None
        return np.clip(z, 0.0, 1.0)

    def __call__(self, points) -> np.ndarray:
        elems, xis = self.locate(points)
        return self.on_reference(elems, xis)[1]


def conformal_map(u: Solution, u_conj: Solution, M: float, origin: str = "z2") -> ConformalMap:
    return ConformalMap(u, u_conj, M, origin)


def hole_boundary_samples(mesh, hole: int, n: int = 200):
    """``(elems, xi)`` of ``n`` points spread uniformly by arclength over the
    boundary of hole ``hole`` (both faces of a slit)."""
    eids = [k for k, t in enumerate(mesh.bnd_tags) if hole_index(t) == hole]
    if not eids:
        raise ValueError(f"mesh has no boundary edges on hole {hole}")
    edges = mesh.bnd_edges[eids]
    length = np.linalg.norm(mesh.nodes[edges[:, 1]] - mesh.nodes[edges[:, 0]], axis=1)
    s = (np.arange(n) + 0.5) / n * length.sum()
    cum = np.concatenate([[0.0], np.cumsum(length)])
    which = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(edges) - 1)
    frac = (s - cum[which]) / length[which]
    owner = _edge_owner(mesh)
    ref_vertices = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    elems = np.empty(n, dtype=np.int64)
    xi = np.empty((n, 2))
    for k, (w, f) in enumerate(zip(which, frac)):
        a, b = edges[w]
        t, la, lb = owner[(int(a), int(b))]
        elems[k] = t
        xi[k] = (1 - f) * ref_vertices[la] + f * ref_vertices[lb]
    return elems, xi


def _edge_owner(mesh) -> dict:
    out = {}
    for t, tri in enumerate(mesh.elements.tolist()):
        for i in range(3):
            a, b = tri[i], tri[(i + 1) % 3]
            out[(a, b)] = (t, i, (i + 1) % 3)
    return out


def extract_canonical(phi: ConformalMap, spec=None, setup=None, n_samples: int = 200) -> CanonicalDomain:
    """Canonical slit domain: hole ``i`` becomes a horizontal slit at height
    ``M * delta_i`` whose extent is the range of ``u`` over ``n_samples``
    boundary points."""
    mesh = phi.mesh
    delta = np.zeros(0) if setup is None else np.asarray(setup.delta)
    if spec is not None and spec.n_holes != mesh.n_holes:
        raise ValueError("domain and mesh disagree on the number of holes")
    slits, spread = [], []
    for i in range(mesh.n_holes):
        elems, xi = hole_boundary_samples(mesh, i, n_samples)
        _, img = phi.on_reference(elems, xi)
        lo, hi = float(img[:, 0].min()), float(img[:, 0].max())
        if lo < -1e-6 or hi > 1 + 1e-6:
            warnings.warn(f"slit {i} extends outside [0, 1]: [{lo}, {hi}]", ConsistencyWarning, stacklevel=2)
        height = phi.M * (delta[i] if phi.origin == "z2" else 1 - delta[i]) if len(delta) else float(img[:, 1].mean())
        slits.append(((lo, float(height)), hi - lo))
        spread.append(float(img[:, 1].max() - img[:, 1].min()))
    return CanonicalDomain(phi.M, slits, spread)


@dataclass
class MapSamples:
    elem: np.ndarray
    point: np.ndarray  # parameter plane
    image: np.ndarray  # canonical domain
    checker: np.ndarray

    def rows(self):
        for e, p, q, c in zip(self.elem, self.point, self.image, self.checker):
            yield int(e), float(p[0]), float(p[1]), float(q[0]), float(q[1]), int(c)


def reference_lattice(density: int) -> np.ndarray:
    """Points ``(i, j) / density`` with ``i + j <= density``."""
    if density < 1:
        raise ValueError("density must be at least 1")
    return np.array([(i / density, j / density) for j in range(density + 1) for i in range(density + 1 - j)])


def sample_map(phi: ConformalMap, density: int = 4, k: int = 8) -> MapSamples:
    """Tensor samples in every element with checkerboard parity of the image.

    Samples are taken element by element, so both faces of a slit are covered.
    """
    lat = reference_lattice(density)
    T = phi.mesh.n_elements
    elems = np.repeat(np.arange(T), len(lat))
    y, img = phi.on_reference(np.arange(T), np.broadcast_to(lat, (T, len(lat), 2)))
    y = y.reshape(-1, 2)
    img = img.reshape(-1, 2)
    # a tiny shift keeps lattice points sitting exactly on a cell edge on one side
    eps = 1e-12
    checker = (np.floor(k * img[:, 0] + eps) + np.floor(k * img[:, 1] / phi.M + eps)).astype(np.int64) % 2
    return MapSamples(elems, y, img, checker)

