"""Hierarchic H1 shape functions on the reference triangle.

Local numbering: three vertex functions (barycentric coordinates), then for
each local edge ``(0, 1), (1, 2), (2, 0)`` the edge modes of degree
``2..p``, then the interior bubbles ordered by total degree ``3..p``.

Edge modes are ``l_i l_j K_k(l_j - l_i)`` where ``K_k`` is the kernel of the
integrated Legendre polynomial of degree ``k``; restricted to the edge they are
the integrated Legendre polynomials. Bubbles are ``l_0 l_1 l_2`` times the
Dubiner polynomials written with scaled Legendre polynomials, so no division
by ``1 - eta`` is ever needed.

Every function is scaled to unit H1 seminorm on the reference triangle. The
scaling of a mode depends only on the mode, so the basis of degree ``p`` is a
bitwise subset of the basis of degree ``p + 1``.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import eval_jacobi

from conjfun.fem.quadrature import triangle_rule

MAX_DEGREE = 16

LOCAL_EDGES = ((0, 1), (1, 2), (2, 0))

_GRAD_LAMBDA = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])


class CapabilityError(ValueError):
    """Requested polynomial degree exceeds the implemented maximum."""


@dataclass(frozen=True)
class LocalDof:
    kind: str  # "vertex" | "edge" | "bubble"
    entity: int  # local vertex or local edge index, -1 for bubbles
    degree: int
    index: int  # mode index within (kind, degree)


def n_local(p: int) -> int:
    return (p + 1) * (p + 2) // 2


def n_bubbles(p: int) -> int:
    return max(p - 1, 0) * max(p - 2, 0) // 2


@lru_cache(maxsize=None)
def local_dofs(p: int) -> tuple[LocalDof, ...]:
    _check_degree(p)
    dofs = [LocalDof("vertex", v, 1, 0) for v in range(3)]
    for e in range(3):
        dofs += [LocalDof("edge", e, k, 0) for k in range(2, p + 1)]
    for d in range(3, p + 1):
        dofs += [LocalDof("bubble", -1, d, m) for m in range(d - 2)]
    return tuple(dofs)


def _check_degree(p: int) -> None:
    if p < 1:
        raise ValueError(f"polynomial degree must be >= 1, got {p}")
    if p > MAX_DEGREE:
        raise CapabilityError(f"degree {p} exceeds implemented maximum {MAX_DEGREE}")


def _jacobi(n, a, b, x):
    """Jacobi polynomial and its derivative."""
    val = eval_jacobi(n, a, b, x)
    if n == 0:
        return val, np.zeros_like(x)
    der = 0.5 * (n + a + b + 1) * eval_jacobi(n - 1, a + 1, b + 1, x)
    return val, der


def _scaled_legendre(nmax, x, t, dx, dt):
    """``t**n P_n(x / t)`` for ``n = 0..nmax`` and gradients.

    ``dx``, ``dt`` are the (constant) gradients of the affine arguments.
    """
    shape = np.shape(x)
    vals = [np.ones(shape), np.array(x, dtype=float)]
    grads = [np.zeros(shape + (2,)), np.broadcast_to(dx, shape + (2,)).copy()]
    for k in range(1, nmax):
        v = ((2 * k + 1) * x * vals[k] - k * t * t * vals[k - 1]) / (k + 1)
        g = (
            (2 * k + 1) * (dx * vals[k][..., None] + x[..., None] * grads[k])
            - k * (2 * t[..., None] * dt * vals[k - 1][..., None] + (t * t)[..., None] * grads[k - 1])
        ) / (k + 1)
        vals.append(v)
        grads.append(g)
    return vals[: nmax + 1], grads[: nmax + 1]


def _raw_edge(k, lam, i, j):
    """Unscaled edge mode of degree k on local edge (i, j) and its gradient."""
    x = lam[:, j] - lam[:, i]
    dx = _GRAD_LAMBDA[j] - _GRAD_LAMBDA[i]
    kern, dkern = _jacobi(k - 2, 1.0, 1.0, x)
    prod = lam[:, i] * lam[:, j]
    dprod = lam[:, j, None] * _GRAD_LAMBDA[i] + lam[:, i, None] * _GRAD_LAMBDA[j]
    val = prod * kern
    grad = dprod * kern[:, None] + prod[:, None] * dkern[:, None] * dx
    return val, grad


def _raw_bubbles(p, pts):
    """Unscaled bubbles of degree 3..p, in local order."""
    xi, eta = pts[:, 0], pts[:, 1]
    lam = np.column_stack([1.0 - xi - eta, xi, eta])
    b = lam[:, 0] * lam[:, 1] * lam[:, 2]
    db = (
        (lam[:, 1] * lam[:, 2])[:, None] * _GRAD_LAMBDA[0]
        + (lam[:, 0] * lam[:, 2])[:, None] * _GRAD_LAMBDA[1]
        + (lam[:, 0] * lam[:, 1])[:, None] * _GRAD_LAMBDA[2]
    )
    # scaled Legendre in (2 xi - 1 + eta) / (1 - eta)
    sx = 2.0 * xi - 1.0 + eta
    st = 1.0 - eta
    leg, dleg = _scaled_legendre(max(p - 3, 1), sx, st, np.array([2.0, 1.0]), np.array([0.0, -1.0]))
    y = 2.0 * eta - 1.0
    vals, grads = [], []
    for d in range(3, p + 1):
        for m in range(d - 2):
            n = d - 3 - m
            jac, djac = _jacobi(n, 2.0 * m + 1.0, 0.0, y)
            psi = leg[m] * jac
            dpsi = dleg[m] * jac[:, None] + (leg[m] * djac * 2.0)[:, None] * np.array([0.0, 1.0])
            vals.append(b * psi)
            grads.append(db * psi[:, None] + b[:, None] * dpsi)
    return vals, grads


@lru_cache(maxsize=None)
def _mode_scale(kind: str, degree: int, index: int) -> float:
    """Inverse H1 seminorm of a raw mode on the reference triangle."""
    pts, w = triangle_rule(2 * degree)
    if kind == "edge":
        lam = np.column_stack([1.0 - pts[:, 0] - pts[:, 1], pts[:, 0], pts[:, 1]])
        _, g = _raw_edge(degree, lam, 0, 1)
    else:
        _, grads = _raw_bubbles(degree, pts)
        g = grads[-(degree - 2) + index]
    return 1.0 / np.sqrt(np.sum(w * np.sum(g * g, axis=1)))


def evaluate(p: int, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Shape function values and reference gradients.

    Parameters
    ----------
    p : int
        Polynomial degree.
    pts : (nq, 2) array
        Points in the reference triangle.

    Returns
    -------
    values : (nq, nloc) array
    grads : (nq, nloc, 2) array
        Gradients with respect to the reference coordinates, for edges oriented
        by increasing local vertex index. Use :func:`edge_signs` to orient them
        globally.
    """
    _check_degree(p)
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    lam = np.column_stack([1.0 - pts[:, 0] - pts[:, 1], pts[:, 0], pts[:, 1]])
    vals = [lam[:, v] for v in range(3)]
    grads = [np.broadcast_to(_GRAD_LAMBDA[v], (len(pts), 2)) for v in range(3)]
    for i, j in LOCAL_EDGES:
        for k in range(2, p + 1):
            v, g = _raw_edge(k, lam, i, j)
            c = _mode_scale("edge", k, 0)
            vals.append(c * v)
            grads.append(c * g)
    if p >= 3:
        bv, bg = _raw_bubbles(p, pts)
        pos = 0
        for d in range(3, p + 1):
            for m in range(d - 2):
                c = _mode_scale("bubble", d, m)
                vals.append(c * bv[pos])
                grads.append(c * bg[pos])
                pos += 1
    return np.stack(vals, axis=1), np.stack(grads, axis=1)


@lru_cache(maxsize=None)
def tabulate(p: int, order: int):
    """Cached quadrature tabulation ``(points, weights, values, grads)``."""
    pts, w = triangle_rule(order)
    vals, grads = evaluate(p, pts)
    for a in (vals, grads):
        a.setflags(write=False)
    return pts, w, vals, grads


def edge_signs(p: int, elements: np.ndarray) -> np.ndarray:
    """Per-element sign of each local shape function.

    An edge mode of odd degree changes sign when the edge is traversed in the
    opposite direction. Edges are oriented globally from the smaller to the
    larger node index, so shape functions from neighbouring elements agree.
    """
    dofs = local_dofs(p)
    signs = np.ones((len(elements), len(dofs)))
    for col, d in enumerate(dofs):
        if d.kind == "edge" and d.degree % 2 == 1:
            i, j = LOCAL_EDGES[d.entity]
            flipped = elements[:, i] > elements[:, j]
            signs[flipped, col] = -1.0
    return signs
