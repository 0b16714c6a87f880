"""Element maps from the reference triangle to the parameter plane.

Straight elements are affine. An element with circular-arc edges gets a
smooth blended correction per curved edge ``(i, j)``::

    x = affine(xi) + l_i l_j * phi(s) / (s (1 - s)),   s = (1 + l_j - l_i) / 2

where ``phi(s) = c(s) - (1 - s) v_i - s v_j`` is the deviation of the arc
``c`` from its chord. The correction reproduces the arc on edge ``(i, j)`` and
vanishes on the other two edges, so corrections of several curved edges add.
"""
import numpy as np

from conjfun.fem.basis import LOCAL_EDGES

_GRAD_LAMBDA = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])

# keeps s(1 - s) away from zero when evaluating exactly at a vertex
_S_CLIP = 1e-9


class ElementMapError(ArithmeticError):
    def __init__(self, msg, element=None):
        super().__init__(msg)
        self.element = element


def curved_edge_data(elements: np.ndarray, arcs: dict) -> dict:
    """Collect arc data per local edge.

    Returns a dict ``local_edge -> (element_ids, data)`` where ``data[k]`` is
    ``(cx, cy, radius, theta_i, theta_j)`` with angles at local vertices
    ``i`` and ``j`` of that edge.
    """
    out = {}
    if not arcs:
        return out
    for le, (i, j) in enumerate(LOCAL_EDGES):
        ids, data = [], []
        a = elements[:, i]
        b = elements[:, j]
        for t in range(len(elements)):
            key = (a[t], b[t]) if a[t] < b[t] else (b[t], a[t])
            arc = arcs.get(key)
            if arc is None:
                continue
            cx, cy, rho, th_lo, th_hi = arc
            th_i, th_j = (th_lo, th_hi) if a[t] < b[t] else (th_hi, th_lo)
            ids.append(t)
            data.append((cx, cy, rho, th_i, th_j))
        if ids:
            out[le] = (np.array(ids), np.array(data))
    return out


def map_points(nodes, elements, ref_pts, curved=None, element_ids=None):
    """Physical points and Jacobians of the element maps.

    Parameters
    ----------
    nodes : (N, 2) array
    elements : (T, 3) int array
    ref_pts : (nq, 2) array or (ne, nq, 2) array
        Reference points, shared by all elements or per element.
    curved : dict, optional
        Output of :func:`curved_edge_data` for ``elements``.
    element_ids : array, optional
        Subset of elements to map; default all.

    Returns
    -------
    x : (ne, nq, 2) array
    J : (ne, nq, 2, 2) array
        ``J[..., c, a] = d x_c / d xi_a``.
    """
    if element_ids is None:
        element_ids = np.arange(len(elements))
    element_ids = np.asarray(element_ids)
    V = nodes[elements[element_ids]]  # (ne, 3, 2)
    ref = np.asarray(ref_pts, dtype=float)
    if ref.ndim == 2:
        ref = np.broadcast_to(ref, (len(element_ids),) + ref.shape)
    lam = np.stack([1.0 - ref[..., 0] - ref[..., 1], ref[..., 0], ref[..., 1]], axis=-1)
    x = np.einsum("eqk,ekc->eqc", lam, V)
    Jaff = np.stack([V[:, 1] - V[:, 0], V[:, 2] - V[:, 0]], axis=-1)  # (ne, 2, 2)
    J = np.broadcast_to(Jaff[:, None], x.shape[:2] + (2, 2)).copy()
    if curved:
        pos = {t: k for k, t in enumerate(element_ids)}
        for le, (ids, data) in curved.items():
            sel = [(pos[t], k) for k, t in enumerate(ids) if t in pos]
            if not sel:
                continue
            rows = np.array([s[0] for s in sel])
            dat = data[[s[1] for s in sel]]
            i, j = LOCAL_EDGES[le]
            dx, dJ = _arc_correction(lam[rows], V[rows], dat, i, j)
            x[rows] += dx
            J[rows] += dJ
    return x, J


def _arc_correction(lam, V, dat, i, j):
    li, lj = lam[..., i], lam[..., j]
    s = np.clip(0.5 * (1.0 + lj - li), _S_CLIP, 1.0 - _S_CLIP)
    cx, cy, rho, thi, thj = (dat[:, k, None] for k in range(5))
    th = thi + s * (thj - thi)
    c = np.stack([cx + rho * np.cos(th), cy + rho * np.sin(th)], axis=-1)
    dc = np.stack([-np.sin(th), np.cos(th)], axis=-1) * (rho * (thj - thi))[..., None]
    vi, vj = V[:, None, i], V[:, None, j]
    phi = c - (1.0 - s)[..., None] * vi - s[..., None] * vj
    dphi = dc + vi - vj
    w = s * (1.0 - s)
    g = phi / w[..., None]
    dg = (dphi * w[..., None] - phi * (1.0 - 2.0 * s)[..., None]) / (w * w)[..., None]
    prod = li * lj
    dprod = lj[..., None] * _GRAD_LAMBDA[i] + li[..., None] * _GRAD_LAMBDA[j]  # (ne, nq, 2)
    ds = 0.5 * (_GRAD_LAMBDA[j] - _GRAD_LAMBDA[i])
    dx = prod[..., None] * g
    dJ = g[..., :, None] * dprod[..., None, :] + (prod[..., None] * dg)[..., :, None] * ds
    return dx, dJ


def jacobian_determinant(J):
    return J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]


def check_orientation(detJ, element_ids):
    bad = ~(detJ > 0)
    if np.any(bad):
        e = int(element_ids[np.argwhere(bad)[0][0]])
        raise ElementMapError(f"element map of element {e} is inverted or degenerate", e)
