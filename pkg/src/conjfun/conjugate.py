"""Direct construction of the conjugate problem of a multiply connected quadrilateral.

The conjugate harmonic function is 0 on side 2, 1 on side 4 and an unknown
constant ``delta_i`` on every hole. Eliminating the free dofs leaves a
quadratic form in the boundary constants; its minimizer with the first
constant pinned to 1 gives the hole potentials through one ``n x n`` solve.
"""
from __future__ import annotations

import json
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from conjfun.fem.assembly import AssembledSystem, DofPartition, dirichlet_data, make_partition
from conjfun.solverlib import Factorization, IndefiniteMatrixError, factor, schur_reduced


class DegenerateConfigurationError(np.linalg.LinAlgError):
    """The reduced hole system is singular (e.g. a hole touches a Dirichlet side)."""


class MalformedPartitionError(ValueError):
    pass


@dataclass
class ReductionMatrix:
    """0/1 matrix summing each constant-valued block to one reduced coordinate."""

    R: sp.csc_matrix
    lengths: list
    dofs: np.ndarray  # global indices of the rows, block by block

    @property
    def n_holes(self) -> int:
        return len(self.lengths) - 1


def build_reduction(partition: DofPartition) -> ReductionMatrix:
    """Reduction over the conjugate-role blocks ``D1, E1..En``.

    Only vertex dofs carry the boundary constant; higher edge modes on these
    boundaries are fixed to 0 and do not appear.
    """
    nv = partition.n_vertex
    blocks = [partition.D1] + list(partition.E)
    rows = [b[b < nv] for b in blocks]
    for k, r in enumerate(rows):
        if len(r) == 0:
            what = "side with value 1" if k == 0 else f"hole {k - 1}"
            raise MalformedPartitionError(f"empty dof block for {what}")
    lengths = [len(r) for r in rows]
    col = np.repeat(np.arange(len(rows)), lengths)
    m = int(sum(lengths))
    R = sp.csc_matrix((np.ones(m), (np.arange(m), col)), shape=(m, len(rows)))
    return ReductionMatrix(R, lengths, np.concatenate(rows).astype(np.int64))


@dataclass
class ConjugateSetup:
    """Reduced matrices and hole potentials.

    ``K0 = R^T A_DD R``, ``K1 = R^T A_DI A_II^-1 A_ID R`` and the reduced energy
    is ``S = K0 - K1``. In the colon notation ``K = K1[1:, 1:] - K0[1:, 1:]``
    and ``b = K1[0, 1:]``.
    """

    reduction: ReductionMatrix
    partition: DofPartition
    K0: np.ndarray
    K1: np.ndarray
    delta: np.ndarray
    factorization: Factorization | None = None
    timings: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    @property
    def S(self) -> np.ndarray:
        return self.K0 - self.K1

    @property
    def K(self) -> np.ndarray:
        return self.K1[1:, 1:] - self.K0[1:, 1:]

    @property
    def b(self) -> np.ndarray:
        return self.K1[0, 1:].copy()

    def reduced_energy(self, delta) -> float:
        y = np.concatenate([[1.0], np.asarray(delta, dtype=float)])
        return float(y @ self.S @ y)

    def to_dict(self) -> dict:
        return {
            "block_lengths": [int(k) for k in self.reduction.lengths],
            "K0": self.K0.tolist(),
            "K1": self.K1.tolist(),
            "K": self.K.tolist(),
            "b": self.b.tolist(),
            "S": self.S.tolist(),
            "delta": self.delta.tolist(),
            "flags": list(self.flags),
        }

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def conjugate_free_set(partition: DofPartition) -> np.ndarray:
    return np.sort(np.concatenate([partition.B, partition.N1, partition.N0])).astype(np.int64)


def solve_hole_potentials(sys: AssembledSystem, R: ReductionMatrix | None = None,
                          factorization: Factorization | None = None) -> ConjugateSetup:
    """Hole potentials of the conjugate problem on the stiffness matrix of ``sys``.

    ``A_II`` (free dofs of the conjugate problem) is factored once unless a
    factorization is passed; ``A_II^-1`` is applied by ``n + 1`` back-solves.
    """
    part = sys.partition if sys.partition.role == "conjugate" else make_partition(sys.dofmap, "conjugate")
    dirichlet = np.concatenate([part.D0, part.D1])
    for i, e in enumerate(part.E):
        if np.isin(e, dirichlet).any():
            raise DegenerateConfigurationError(f"hole {i} touches a Dirichlet side of the conjugate problem")
    if R is None:
        R = build_reduction(part)
    A = sys.A
    I = conjugate_free_set(part)
    D = R.dofs
    timings = {}
    if factorization is None:
        t0 = time.perf_counter()
        try:
            factorization = factor(A[I][:, I], stats=sys.stats)
        except IndefiniteMatrixError as exc:
            raise DegenerateConfigurationError(f"conjugate free block is singular: {exc}") from exc
        timings["factorization"] = time.perf_counter() - t0
        sys.stats.timings["factorization"] = sys.stats.timings.get("factorization", 0.0) + timings["factorization"]
    t0 = time.perf_counter()
    AI = A[I]
    _, K0, K1 = schur_reduced(None, AI[:, D], A[D][:, D], R.R, factorization, sys.stats)
    S = K0 - K1
    n = R.n_holes
    if n == 0:
        delta = np.zeros(0)
    else:
        # Stationarity of y^T S y in the hole coordinates with y_0 = 1:
        # S[1:, 1:] delta = -S[1:, 0]. The paper writes this as
        # min x'^T K x' - b^T x' with K = K1 - K0, which drops a factor 2 on b.
        Shh = S[1:, 1:]
        cond = np.linalg.cond(Shh)
        if not np.isfinite(cond) or cond > 1e13:
            raise DegenerateConfigurationError(
                f"reduced hole system is singular (cond={cond:.3e}); does a hole touch a Dirichlet side?")
        delta = np.linalg.solve(Shh, -S[1:, 0])
    timings["construction"] = time.perf_counter() - t0
    sys.stats.timings["conjugate_construction"] = sys.stats.timings.get("conjugate_construction", 0.0) + timings["construction"]
    setup = ConjugateSetup(R, part, K0, K1, delta, factorization, timings)
    for i, d in enumerate(delta):
        if not 0.0 < d < 1.0:
            setup.flags.append(f"delta[{i}]={d:.6g} outside (0,1)")
            warnings.warn(f"hole potential {i} = {d} outside (0, 1)", RuntimeWarning, stacklevel=2)
    return setup


def build_conjugate_system(sys: AssembledSystem, setup: ConjugateSetup) -> AssembledSystem:
    """The conjugate problem on the same matrix: 0 on side 2, 1 on side 4,
    ``delta_i`` on hole ``i`` (both faces of a slit), Neumann on sides 1 and 3.

    The factorization from ``setup`` is reused by :func:`solve_primary`.
    """
    fixed, values = dirichlet_data(setup.partition, holes_fixed=True, hole_values=setup.delta)
    return sys.with_conditions(setup.partition, fixed, values, setup.factorization)


def hole_flux(sys: AssembledSystem, x: np.ndarray, setup: ConjugateSetup) -> np.ndarray:
    """Discrete flux through each hole: summed residual of the hole vertex rows."""
    r = sys.A @ x
    lengths = setup.reduction.lengths
    rows = setup.reduction.dofs
    out, start = [], lengths[0]
    for k in lengths[1:]:
        out.append(float(r[rows[start:start + k]].sum()))
        start += k
    return np.array(out)
