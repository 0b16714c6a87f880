"""Auxiliary-subspace a posteriori error estimation.

For a solution of degree ``p`` the residual is projected onto the space ``W``
of edge modes of degree ``p + 1`` and interior bubbles of degrees ``p + 1`` and
``p + 2``. Edge modes on Dirichlet sides (and on holes when the holes carry
Dirichlet data) are left out; Neumann edges are kept.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from conjfun.fem import basis
from conjfun.fem.assembly import AssembledSystem, Solution, assemble, dirichlet_data, make_partition
from conjfun.solverlib import SolverStats, factor, multi_solve


@dataclass
class ErrorEstimate:
    eta: float
    contributions: np.ndarray  # per element, sums to eta**2
    n_aux: int

    @property
    def eta_squared(self) -> float:
        return self.eta ** 2


def auxiliary_system(sys: AssembledSystem, extra: int = 2) -> AssembledSystem:
    """Stiffness matrix of degree ``p + extra`` on the mesh of ``sys``."""
    P = sys.p + extra
    if P > basis.MAX_DEGREE:
        raise basis.CapabilityError(f"degree {P} exceeds the implemented maximum {basis.MAX_DEGREE}")
    return assemble(sys.mesh, sys.chart, P, role=sys.partition.role, keep_local=True, stats=SolverStats())


def _holes_fixed(sys: AssembledSystem) -> bool:
    E = sys.partition.E
    return bool(E) and bool(np.isin(E[0][:1], sys.fixed).all())


def _fixed_in(sys: AssembledSystem, big: AssembledSystem) -> np.ndarray:
    part = make_partition(big.dofmap, sys.partition.role)
    fixed, _ = dirichlet_data(part, holes_fixed=_holes_fixed(sys))
    return fixed


def embed(x: Solution, big: AssembledSystem) -> np.ndarray:
    """Coefficients of ``x`` in the higher-degree space of ``big``."""
    out = np.zeros(big.ndof)
    out[x.dofmap.embed(big.dofmap)] = x.x
    return out


def estimate(sys: AssembledSystem, x: Solution, aux: AssembledSystem | None = None) -> ErrorEstimate:
    """Energy norm of the residual projected onto the auxiliary space.

    ``aux`` may pass a degree ``p + 2`` system with local matrices to share
    between several estimates on the same mesh.
    """
    p = sys.p
    big = aux if aux is not None else auxiliary_system(sys)
    if big.p != p + 2 or big.local is None:
        raise ValueError("auxiliary system must have degree p + 2 and keep local matrices")
    dm = big.dofmap
    deg, kind = dm.degree, dm.kind
    fixed = np.zeros(dm.ndof, dtype=bool)
    fixed[_fixed_in(sys, big)] = True
    in_W = ((kind == 1) & (deg == p + 1) & ~fixed) | ((kind == 2) & (deg >= p + 1))
    W = np.flatnonzero(in_W)
    xb = embed(x, big)
    A = big.A
    r = -(A[W] @ xb)
    F = factor(A[W][:, W], stats=big.stats)
    e = multi_solve(F, r, big.stats)
    full = np.zeros(dm.ndof)
    full[W] = e
    z = full[dm.l2g]
    contrib = np.einsum("ti,tij,tj->t", z, big.local, z)
    eta2 = float(e @ (A[W][:, W] @ e))
    return ErrorEstimate(float(np.sqrt(max(eta2, 0.0))), contrib, len(W))


def overkill_error(x: Solution, over: Solution) -> float:
    """Energy-norm distance between ``x`` and a higher-degree solution on the same mesh."""
    d = over.x - embed(x, over.system)
    return float(np.sqrt(max(float(d @ (over.system.A @ d)), 0.0)))
