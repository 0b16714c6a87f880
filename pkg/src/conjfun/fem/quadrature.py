"""Quadrature rules on the reference triangle and interval.

The reference triangle is ``{(0, 0), (1, 0), (0, 1)}``. Triangle rules are
collapsed (Duffy) tensor rules: Gauss-Legendre in the radial-like direction and
Gauss-Jacobi with weight ``(1 - t)`` in the collapsed direction, so a rule with
``n`` points per direction integrates polynomials of total degree ``2n - 1``
exactly.
"""
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre points and weights mapped to ``[0, 1]``."""
    x, w = roots_legendre(n)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def triangle_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature rule exact for polynomials of total degree ``order``.

    Parameters
    ----------
    order : int
        Polynomial degree to integrate exactly.

    Returns
    -------
    points : (nq, 2) array
        Points in the reference triangle.
    weights : (nq,) array
        Weights summing to 1/2 (the reference area).
    """
    if order < 0:
        raise ValueError(f"quadrature order must be non-negative, got {order}")
    n = max(1, (order + 2) // 2)
    s, ws = roots_legendre(n)
    t, wt = roots_jacobi(n, 1.0, 0.0)
    S, T = np.meshgrid(s, t, indexing="ij")
    W = np.outer(ws, wt) / 8.0
    xi = 0.25 * (1.0 + S) * (1.0 - T)
    eta = 0.5 * (1.0 + T)
    pts = np.column_stack([xi.ravel(), eta.ravel()])
    pts.setflags(write=False)
    w = W.ravel()
    w.setflags(write=False)
    return pts, w
