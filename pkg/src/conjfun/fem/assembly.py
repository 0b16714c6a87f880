"""Degree-of-freedom bookkeeping, stiffness assembly and Dirichlet solves.

Global numbering is by entity: node ``n`` is dof ``n``; edge ``e`` carries
modes ``2..p`` at ``n_nodes + e (p - 1) + (k - 2)``; element ``t`` carries its
bubbles after all edge modes. The numbering of a degree-``p`` space therefore
embeds into any higher degree on the same mesh (see :meth:`DofMap.embed`).
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from conjfun.fem import basis
from conjfun.fem.mapping import (check_orientation, jacobian_determinant,
                                 map_points)
from conjfun.geometry import PLANE, SurfaceChart
from conjfun.mesh import Mesh, hole_index
from conjfun.solverlib import Factorization, IndefiniteMatrixError, SolverStats, factor, multi_solve

# side tags of the quadrilateral seen from each role
_ROLE_SIDES = {
    "primary": ("g1", "g2", "g3", "g4"),
    "conjugate": ("g2", "g3", "g4", "g1"),
}


class AssemblyAuditError(RuntimeError):
    """The free block of the system is not positive definite."""


@dataclass(frozen=True)
class BasisSpec:
    p: int
    family: str = "hierarchic"

    def __post_init__(self):
        basis._check_degree(self.p)

    @property
    def n_local(self) -> int:
        return basis.n_local(self.p)


class DofMap:
    """Global degrees of freedom of the hierarchic space of degree ``p``."""

    def __init__(self, mesh: Mesh, p: int):
        basis._check_degree(p)
        self.mesh = mesh
        self.p = p
        self.edges, self.elem_edges = mesh.edges()
        self.n_vertex = mesh.n_nodes
        self.n_edge_modes = len(self.edges) * (p - 1)
        self.nb = basis.n_bubbles(p)
        self.ndof = self.n_vertex + self.n_edge_modes + mesh.n_elements * self.nb
        self.local = basis.local_dofs(p)
        self.l2g = self._local_to_global()
        self.signs = basis.edge_signs(p, mesh.elements)

    def __repr__(self):
        return f"DofMap(p={self.p}, ndof={self.ndof})"

    def edge_dof(self, e, k):
        return self.n_vertex + np.asarray(e) * (self.p - 1) + (k - 2)

    def bubble_dof(self, t, d, m):
        off = (d - 3) * (d - 2) // 2 + m
        return self.n_vertex + self.n_edge_modes + np.asarray(t) * self.nb + off

    def _local_to_global(self):
        T = self.mesh.n_elements
        cols = []
        ts = np.arange(T)
        for d in self.local:
            if d.kind == "vertex":
                cols.append(self.mesh.elements[:, d.entity])
            elif d.kind == "edge":
                cols.append(self.edge_dof(self.elem_edges[:, d.entity], d.degree))
            else:
                cols.append(self.bubble_dof(ts, d.degree, d.index))
        return np.column_stack(cols).astype(np.int64)

    @property
    def degree(self) -> np.ndarray:
        """Polynomial degree of every global dof."""
        deg = np.ones(self.ndof, dtype=np.int64)
        k = np.arange(2, self.p + 1)
        deg[self.n_vertex:self.n_vertex + self.n_edge_modes] = np.tile(k, len(self.edges))
        bub = [d for d in range(3, self.p + 1) for _ in range(d - 2)]
        deg[self.n_vertex + self.n_edge_modes:] = np.tile(np.array(bub, dtype=np.int64), self.mesh.n_elements)
        return deg

    @property
    def kind(self) -> np.ndarray:
        """0 for vertex, 1 for edge, 2 for bubble dofs."""
        out = np.full(self.ndof, 2, dtype=np.int8)
        out[: self.n_vertex] = 0
        out[self.n_vertex:self.n_vertex + self.n_edge_modes] = 1
        return out

    def edge_of_dof(self) -> np.ndarray:
        """Edge index of edge dofs, ``-1`` elsewhere."""
        out = np.full(self.ndof, -1, dtype=np.int64)
        out[self.n_vertex:self.n_vertex + self.n_edge_modes] = np.repeat(np.arange(len(self.edges)), self.p - 1)
        return out

    def embed(self, other: "DofMap") -> np.ndarray:
        """Index in ``other`` (same mesh, degree >= p) of each dof of ``self``."""
        if other.mesh is not self.mesh and other.mesh.n_elements != self.mesh.n_elements:
            raise ValueError("embedding needs the same mesh")
        if other.p < self.p:
            raise ValueError("target space has lower degree")
        idx = np.empty(self.ndof, dtype=np.int64)
        idx[: self.n_vertex] = np.arange(self.n_vertex)
        e = np.repeat(np.arange(len(self.edges)), self.p - 1)
        k = np.tile(np.arange(2, self.p + 1), len(self.edges))
        idx[self.n_vertex:self.n_vertex + self.n_edge_modes] = other.edge_dof(e, k)
        if self.nb:
            bub = [(d, m) for d in range(3, self.p + 1) for m in range(d - 2)]
            t = np.repeat(np.arange(self.mesh.n_elements), self.nb)
            d = np.tile([b[0] for b in bub], self.mesh.n_elements)
            m = np.tile([b[1] for b in bub], self.mesh.n_elements)
            idx[self.n_vertex + self.n_edge_modes:] = other.bubble_dof(t, d, m)
        return idx

    def boundary_tags(self) -> list[set]:
        """Boundary tags touching each dof (empty for interior dofs)."""
        tags = [set() for _ in range(self.ndof)]
        edge_index = {tuple(e): k for k, e in enumerate(self.edges.tolist())}
        for (a, b), t in zip(self.mesh.bnd_edges.tolist(), self.mesh.bnd_tags):
            tags[a].add(t)
            tags[b].add(t)
            e = edge_index[(min(a, b), max(a, b))]
            for k in range(2, self.p + 1):
                tags[int(self.edge_dof(e, k))].add(t)
        return tags


@dataclass
class DofPartition:
    """Disjoint dof sets of one role of the quadrilateral.

    For the role's corner order ``(w1, w2, w3, w4)`` the sets are: ``D0`` on the
    closed side ``w1 w2`` (value 0), ``D1`` on the closed side ``w3 w4``
    (value 1), ``N0`` and ``N1`` on the open sides ``w2 w3`` and ``w4 w1``,
    ``E[i]`` on hole ``i`` and ``B`` the interior. With the primary role these
    are the sets of the primary problem; the conjugate role rotates the corners
    by one.
    """

    B: np.ndarray
    N1: np.ndarray
    N0: np.ndarray
    D1: np.ndarray
    D0: np.ndarray
    E: list
    role: str
    n_vertex: int
    ndof: int

    @property
    def order(self) -> np.ndarray:
        """Dofs in block order ``B, N1, N0, D1, D0, E1..En``."""
        return np.concatenate([self.B, self.N1, self.N0, self.D1, self.D0, *self.E]).astype(np.int64)

    @property
    def block_lengths(self) -> list[int]:
        """``k0..kn``: constant-carrying dofs of ``D1`` and of each hole."""
        return [int(np.sum(self.D1 < self.n_vertex))] + [int(np.sum(e < self.n_vertex)) for e in self.E]

    def check(self) -> None:
        allsets = self.order
        if len(allsets) != self.ndof or len(np.unique(allsets)) != self.ndof:
            raise ValueError("dof sets are not a partition")


def make_partition(dm: DofMap, role: str = "primary") -> DofPartition:
    s1, s2, s3, s4 = _ROLE_SIDES[role]
    tags = dm.boundary_tags()
    B, N1, N0, D1, D0 = [], [], [], [], []
    E = [[] for _ in range(dm.mesh.n_holes)]
    for i, ts in enumerate(tags):
        if not ts:
            B.append(i)
            continue
        holes = {hole_index(t) for t in ts} - {-1}
        if holes:
            if len(holes) > 1 or len(holes) != len(ts) and any(hole_index(t) < 0 for t in ts):
                raise ValueError(f"dof {i} touches several boundary components {sorted(ts)}")
            E[holes.pop()].append(i)
        elif s1 in ts:
            D0.append(i)
        elif s3 in ts:
            D1.append(i)
        elif s2 in ts:
            N0.append(i)
        elif s4 in ts:
            N1.append(i)
        else:  # pragma: no cover
            raise ValueError(f"dof {i} has unknown tags {ts}")
    arr = lambda v: np.array(v, dtype=np.int64)  # noqa: E731
    part = DofPartition(arr(B), arr(N1), arr(N0), arr(D1), arr(D0), [arr(e) for e in E], role, dm.n_vertex, dm.ndof)
    for k, e in enumerate(part.E):
        if len(e) == 0:
            raise ValueError(f"hole {k} has no dofs")
    part.check()
    return part


# --------------------------------------------------------------------------
# element matrices
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _reference_stiffness(p: int):
    """``Kab[a, b] = int d_a phi_i d_b phi_j`` on the reference triangle."""
    _, w, _, G = basis.tabulate(p, max(2 * p - 2, 0))
    K = np.einsum("q,qia,qjb->abij", w, G, G)
    K.setflags(write=False)
    return K


def quadrature_order(p: int, curved: bool = False) -> int:
    return 2 * p + 4 + (2 if curved else 0)


def element_matrices(mesh: Mesh, chart: SurfaceChart | None, p: int, order_shift: int = 0, chunk: int = 256):
    """Local stiffness matrices ``(T, nloc, nloc)`` before edge orientation.

    Affine elements in the plane use the closed-form reference integrals; all
    other elements are integrated with collapsed Gauss rules of order
    ``2p + 4`` (``+2`` on curved elements) plus ``order_shift``.
    """
    chart = chart or PLANE
    T = mesh.n_elements
    nloc = basis.n_local(p)
    K = np.empty((T, nloc, nloc))
    curved = mesh.curved()
    is_curved = np.zeros(T, dtype=bool)
    for ids, _ in curved.values():
        is_curved[ids] = True
    affine = np.flatnonzero(~is_curved) if chart.is_identity else np.zeros(0, dtype=np.int64)
    if len(affine):
        V = mesh.nodes[mesh.elements[affine]]
        J = np.stack([V[:, 1] - V[:, 0], V[:, 2] - V[:, 0]], axis=-1)
        det = jacobian_determinant(J)
        check_orientation(det, affine)
        Jinv = np.linalg.inv(J)
        M = np.einsum("tac,tbc->tab", Jinv, Jinv) * det[:, None, None]
        Kab = _reference_stiffness(p)
        K[affine] = np.einsum("tab,abij->tij", M, Kab)
    rest = np.setdiff1d(np.arange(T), affine)
    for flag in (False, True):
        ids = rest[is_curved[rest] == flag]
        if not len(ids):
            continue
        pts, w, _, G = basis.tabulate(p, quadrature_order(p, flag) + order_shift)
        nq = len(w)
        Gq = np.ascontiguousarray(G.transpose(1, 0, 2).reshape(nloc, nq * 2))
        for start in range(0, len(ids), chunk):
            sub = ids[start:start + chunk]
            x, J = map_points(mesh.nodes, mesh.elements, pts, curved, sub)
            det = jacobian_determinant(J)
            check_orientation(det, sub)
            Jinv = np.linalg.inv(J)
            if chart.is_identity:
                M = np.einsum("tqac,tqbc->tqab", Jinv, Jinv)
            else:
                C = chart.metric_coefficient(x)
                M = np.einsum("tqac,tqcd,tqbd->tqab", Jinv, C, Jinv)
            M *= (det * w)[..., None, None]
            H = np.einsum("tqab,qjb->tqaj", M, G).reshape(len(sub), nq * 2, nloc)
            K[sub] = np.matmul(Gq, H)
    return 0.5 * (K + K.transpose(0, 2, 1))


# --------------------------------------------------------------------------
# systems
# --------------------------------------------------------------------------


@dataclass
class AssembledSystem:
    """Stiffness matrix with the partition and Dirichlet data of one problem.

    ``fixed``/``values`` are the essential conditions; the remaining dofs are
    free. ``factorization`` caches the factorization of the free block.
    """

    A: sp.csr_matrix
    dofmap: DofMap
    chart: SurfaceChart
    partition: DofPartition
    fixed: np.ndarray
    values: np.ndarray
    local: np.ndarray | None = None
    stats: SolverStats = field(default_factory=SolverStats)
    factorization: Factorization | None = None

    @property
    def mesh(self) -> Mesh:
        return self.dofmap.mesh

    @property
    def p(self) -> int:
        return self.dofmap.p

    @property
    def ndof(self) -> int:
        return self.dofmap.ndof

    @property
    def free(self) -> np.ndarray:
        mask = np.ones(self.ndof, dtype=bool)
        mask[self.fixed] = False
        return np.flatnonzero(mask)

    def blocked(self):
        """``(A_perm, order)``: the matrix in block order ``B, N1, N0, D1, D0, E``."""
        order = self.partition.order
        return self.A[order][:, order], order

    def with_conditions(self, partition, fixed, values, factorization=None) -> "AssembledSystem":
        return replace(self, partition=partition, fixed=np.asarray(fixed, dtype=np.int64),
                       values=np.asarray(values, dtype=float), factorization=factorization)


def dirichlet_data(part: DofPartition, holes_fixed: bool = False, hole_values=None):
    """Essential conditions of a role: 0 on ``D0``, 1 on ``D1`` (vertex dofs),
    optionally constants on the holes. Higher modes on these sides are 0."""
    sets = [part.D0, part.D1]
    vals = [np.zeros(len(part.D0)), (part.D1 < part.n_vertex).astype(float)]
    if holes_fixed:
        hv = np.zeros(len(part.E)) if hole_values is None else np.asarray(hole_values, dtype=float)
        for e, v in zip(part.E, hv):
            sets.append(e)
            vals.append(np.where(e < part.n_vertex, v, 0.0))
    fixed = np.concatenate(sets).astype(np.int64)
    values = np.concatenate(vals)
    order = np.argsort(fixed)
    return fixed[order], values[order]


def assemble(mesh: Mesh, chart: SurfaceChart | None = None, basis_spec: BasisSpec | int = 2,
             role: str = "primary", keep_local: bool = False, order_shift: int = 0,
             stats: SolverStats | None = None) -> AssembledSystem:
    """Assemble the Laplace-Beltrami stiffness matrix on ``mesh``.

    The returned system carries the primary-role partition and Dirichlet data
    (0 on side 1, 1 on side 3, holes free).
    """
    if isinstance(basis_spec, int):
        basis_spec = BasisSpec(basis_spec)
    chart = chart or PLANE
    stats = stats or SolverStats()
    p = basis_spec.p
    t0 = time.perf_counter()
    dm = DofMap(mesh, p)
    Kloc = element_matrices(mesh, chart, p, order_shift)
    Kloc *= dm.signs[:, :, None] * dm.signs[:, None, :]
    nloc = Kloc.shape[1]
    rows = np.repeat(dm.l2g, nloc, axis=1).ravel()
    cols = np.tile(dm.l2g, (1, nloc)).ravel()
    A = sp.coo_matrix((Kloc.ravel(), (rows, cols)), shape=(dm.ndof, dm.ndof)).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    stats.timings["integration"] = stats.timings.get("integration", 0.0) + time.perf_counter() - t0
    part = make_partition(dm, role)
    fixed, values = dirichlet_data(part)
    return AssembledSystem(A, dm, chart, part, fixed, values, Kloc if keep_local else None, stats)


def solve_dirichlet(A, fixed, values, factorization=None, stats=None):
    """Solve ``A_II x_I = -A_ID x_D`` and return ``(x, factorization)``."""
    n = A.shape[0]
    mask = np.ones(n, dtype=bool)
    mask[fixed] = False
    free = np.flatnonzero(mask)
    x = np.zeros(n)
    x[fixed] = values
    A_II = A[free][:, free]
    if factorization is None:
        t0 = time.perf_counter()
        try:
            factorization = factor(A_II, stats=stats)
        except IndefiniteMatrixError as exc:
            raise AssemblyAuditError(f"free block is not positive definite: {exc}") from exc
        if stats is not None:
            stats.timings["factorization"] = stats.timings.get("factorization", 0.0) + time.perf_counter() - t0
    rhs = -(A[free][:, fixed] @ x[fixed])
    x[free] = multi_solve(factorization, rhs, stats)
    return x, factorization


@dataclass
class Solution:
    x: np.ndarray
    system: AssembledSystem

    @property
    def dofmap(self) -> DofMap:
        return self.system.dofmap

    @property
    def mesh(self) -> Mesh:
        return self.system.mesh

    def energy(self) -> float:
        return float(self.x @ (self.system.A @ self.x))

    def local_coefficients(self, elems) -> np.ndarray:
        dm = self.dofmap
        elems = np.asarray(elems)
        return self.x[dm.l2g[elems]] * dm.signs[elems]

    def evaluate_local(self, elems, xi):
        """Values and parameter-plane gradients at reference points.

        ``elems`` has shape ``(n,)`` and ``xi`` shape ``(n, 2)`` (one point per
        element entry) or ``(n, m, 2)``.
        """
        elems = np.atleast_1d(np.asarray(elems))
        xi = np.asarray(xi, dtype=float)
        single = xi.ndim == 2
        if single:
            xi = xi[:, None, :]
        n, m, _ = xi.shape
        tol = 1e-12
        if np.any(xi < -tol) or np.any(xi.sum(axis=-1) > 1 + tol):
            raise ValueError("reference point outside the element")
        vals, grads = basis.evaluate(self.dofmap.p, xi.reshape(-1, 2))
        vals = vals.reshape(n, m, -1)
        grads = grads.reshape(n, m, -1, 2)
        c = self.local_coefficients(elems)
        u = np.einsum("nmi,ni->nm", vals, c)
        g_ref = np.einsum("nmia,ni->nma", grads, c)
        mesh = self.mesh
        y, J = map_points(mesh.nodes, mesh.elements[elems], xi, _subset_curved(mesh, elems))
        g = np.linalg.solve(np.swapaxes(J, -1, -2), g_ref[..., None])[..., 0]
        if single:
            return u[:, 0], g[:, 0], y[:, 0]
        return u, g, y

    def evaluate(self, elem: int, xi):
        """Value, parameter gradient and surface (tangential) gradient at one point."""
        u, g, y = self.evaluate_local([elem], np.asarray(xi, dtype=float)[None])
        chart = self.system.chart
        Jx = chart.jacobian(y[0])
        G = Jx.T @ Jx
        surf = Jx @ np.linalg.solve(G, g[0])
        return float(u[0]), g[0], surf


def _subset_curved(mesh: Mesh, elems):
    """Curved-edge data re-indexed for a subset of elements."""
    curved = mesh.curved()
    if not curved:
        return None
    pos = {}
    for k, t in enumerate(np.asarray(elems).tolist()):
        pos.setdefault(t, []).append(k)
    out = {}
    for le, (ids, data) in curved.items():
        rows, dat = [], []
        for t, d in zip(ids.tolist(), data):
            for k in pos.get(t, ()):
                rows.append(k)
                dat.append(d)
        if rows:
            out[le] = (np.array(rows), np.array(dat))
    return out


def solve_primary(system: AssembledSystem) -> Solution:
    """Solve the mixed problem described by the system's essential conditions.

    The factorization of the free block is cached on ``system`` and reused.
    """
    x, F = solve_dirichlet(system.A, system.fixed, system.values, system.factorization, system.stats)
    system.factorization = F
    return Solution(x, system)
