"""Sparse symmetric linear algebra for the block systems.

The factorization is SuperLU in symmetric mode with a minimum-degree
ordering on ``A + A^T`` and no pivoting, which for an SPD matrix is an
``L D L^T`` factorization; :meth:`Factorization.cholesky` rescales it to the
Cholesky factor. A non-positive pivot means the matrix is not SPD.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg, splu


class IndefiniteMatrixError(np.linalg.LinAlgError):
    def __init__(self, msg, pivot=None):
        super().__init__(msg)
        self.pivot = pivot


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances shared by all solves."""

    pivot_rtol: float = 64 * np.finfo(float).eps
    residual_rtol: float = 1e-13
    refinement_steps: int = 3
    iterative_rtol: float = 1e-13
    iterative_maxiter: int = 100000
    ordering: str = "MMD_AT_PLUS_A"


DEFAULT = SolverConfig()


@dataclass
class SolverStats:
    """Counters and timers filled in by the pipeline."""

    factorizations: int = 0
    solves: int = 0
    timings: dict = field(default_factory=dict)

    def tic(self, key):
        self.timings[key] = self.timings.get(key, 0.0) - time.perf_counter()

    def toc(self, key):
        self.timings[key] += time.perf_counter()


class Factorization:
    """Reusable factorization of a sparse SPD matrix."""

    def __init__(self, A, config: SolverConfig = DEFAULT, stats: SolverStats | None = None):
        A = sp.csc_matrix(A)
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"matrix must be square, got {A.shape}")
        self.A = A
        self.config = config
        self.n = A.shape[0]
        self._lu = None
        self._cg_diag = None
        if stats is not None:
            stats.factorizations += 1
        if self.n == 0:
            return
        try:
            lu = splu(A, permc_spec=config.ordering, diag_pivot_thresh=0.0,
                      options={"SymmetricMode": True})
        except RuntimeError as exc:
            if "singular" in str(exc).lower():
                raise IndefiniteMatrixError(f"matrix is singular: {exc}") from exc
            # out of memory in the direct solver: fall back to Jacobi-CG
            self._cg_diag = A.diagonal()
            return
        d = lu.U.diagonal()
        tol = config.pivot_rtol * max(float(np.abs(A.diagonal()).max()), 1.0)
        bad = np.flatnonzero(~(d > tol))
        if len(bad):
            k = int(lu.perm_c[bad[0]])
            raise IndefiniteMatrixError(f"non-positive pivot {d[bad[0]]:.3e} at row {k}", pivot=k)
        self._lu = lu

    def cholesky(self):
        """``(L, perm)`` with ``A[perm][:, perm] = L @ L.T``."""
        if self._lu is None:
            raise RuntimeError("no direct factorization available")
        lu = self._lu
        L = lu.L @ sp.diags(np.sqrt(lu.U.diagonal()))
        perm = np.empty(self.n, dtype=np.int64)
        perm[lu.perm_r] = np.arange(self.n)
        return sp.csr_matrix(L), perm

    def _raw_solve(self, B):
        if self._lu is not None:
            return self._lu.solve(B)
        X = np.empty_like(B)
        M = sp.diags(1.0 / self._cg_diag)
        for j in range(B.shape[1]):
            X[:, j], info = cg(self.A, B[:, j], rtol=self.config.iterative_rtol, atol=0.0, M=M,
                               maxiter=self.config.iterative_maxiter)
            if info != 0:
                raise np.linalg.LinAlgError(f"CG did not converge (info={info})")
        return X

    def solve(self, B):
        return multi_solve(self, B)


def factor(A, config: SolverConfig = DEFAULT, stats: SolverStats | None = None) -> Factorization:
    """Factor an SPD matrix, raising :class:`IndefiniteMatrixError` otherwise."""
    return Factorization(A, config, stats)


def multi_solve(F: Factorization, B, stats: SolverStats | None = None) -> np.ndarray:
    """Solve ``A X = B`` column by column with iterative refinement.

    Each column is refined until its residual is below
    ``residual_rtol * ||b||`` or the refinement budget is spent.
    """
    B = np.asarray(B, dtype=float)
    vector = B.ndim == 1
    B2 = B.reshape(F.n, -1) if not vector else B[:, None]
    if B2.shape[0] != F.n:
        raise ValueError(f"right-hand side has {B2.shape[0]} rows, matrix has {F.n}")
    if F.n == 0 or B2.shape[1] == 0:
        return np.zeros(B.shape)
    X = F._raw_solve(np.ascontiguousarray(B2))
    bnorm = np.linalg.norm(B2, axis=0)
    for _ in range(F.config.refinement_steps):
        Rs = B2 - F.A @ X
        rnorm = np.linalg.norm(Rs, axis=0)
        todo = rnorm > F.config.residual_rtol * bnorm
        if not np.any(todo):
            break
        X[:, todo] += F._raw_solve(np.ascontiguousarray(Rs[:, todo]))
    if stats is not None:
        stats.solves += B2.shape[1]
    return X[:, 0] if vector else X


def schur_reduced(A_II, A_ID, A_DD, R, F: Factorization | None = None, stats: SolverStats | None = None):
    """Reduced Dirichlet energy ``R^T (A_DD - A_DI A_II^-1 A_ID) R``.

    Returns ``(S, K0, K1)`` with ``K0 = R^T A_DD R`` and
    ``K1 = R^T A_DI A_II^-1 A_ID R``. ``A_II^-1`` is applied through
    ``R.shape[1]`` back-solves with the factorization ``F``.
    """
    if F is None:
        F = factor(A_II, stats=stats)
    R = sp.csc_matrix(R)
    Y = np.asarray((A_ID @ R).todense()) if sp.issparse(A_ID @ R) else np.asarray(A_ID @ R)
    Z = multi_solve(F, Y, stats)
    K1 = Y.T @ Z
    K1 = 0.5 * (K1 + K1.T)
    K0 = R.T @ (A_DD @ R)
    K0 = np.asarray(K0.todense()) if sp.issparse(K0) else np.asarray(K0)
    K0 = 0.5 * (K0 + K0.T)
    return K0 - K1, K0, K1
