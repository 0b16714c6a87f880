"""Deterministic report files, CSV tables and SVG figures."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with sorted keys and every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}"{k}": {dumps(obj[k], indent, _level + 1)}' for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def write_csv(path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt_float(float(r[c])) if isinstance(r[c], float) else r[c] for c in columns])


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "conjfun"
    return plt


def lattice_triangles(density: int) -> np.ndarray:
    """Sub-triangles of the reference lattice in the order of ``reference_lattice``."""
    idx, k = {}, 0
    for j in range(density + 1):
        for i in range(density + 1 - j):
            idx[i, j] = k
            k += 1
    out = []
    for j in range(density):
        for i in range(density - j):
            out.append((idx[i, j], idx[i + 1, j], idx[i, j + 1]))
            if i + j < density - 1:
                out.append((idx[i + 1, j], idx[i + 1, j + 1], idx[i, j + 1]))
    return np.array(out, dtype=np.int64)


def plot_convergence(path, rows, title: str = "") -> None:
    """Reciprocal error and the relative estimates against ``N^(1/3)`` on a log scale."""
    plt = _pyplot()
    x = np.array([r["N"] for r in rows], dtype=float) ** (1 / 3)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.semilogy(x, [r["reci"] for r in rows], "o-", label="reci")
    for key, Mkey, label in (("eta_primary", "M", r"$\eta^2/M$"), ("eta_conjugate", "M_conj", r"$\tilde\eta^2/\tilde M$")):
        vals = np.array([r[key] ** 2 / r[Mkey] for r in rows])
        if np.all(np.isfinite(vals)):
            ax.semilogy(x, vals, "s--", label=label)
    for r in rows:
        ax.annotate(f"p={r['p']}", (r["N"] ** (1 / 3), r["reci"]), fontsize=7)
    ax.set_xlabel(r"$N^{1/3}$")
    ax.set_ylabel("error")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def plot_canonical(path, canonical, title: str = "") -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(4, 4 * max(canonical.h, 0.2)))
    ax.plot([0, 1, 1, 0, 0], [0, 0, canonical.h, canonical.h, 0], "k-")
    for (z, d) in canonical.slits:
        ax.plot([z[0], z[0] + d], [z[1], z[1]], "r-", lw=2)
    ax.set_aspect("equal")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def plot_map(path, samples, mesh, density: int, title: str = "") -> None:
    """Checkerboard of the canonical coordinates drawn on the parameter plane."""
    plt = _pyplot()
    import matplotlib.tri as mtri
    fig, ax = plt.subplots(figsize=(5, 5))
    local = lattice_triangles(density)
    npts = (density + 1) * (density + 2) // 2
    tris = (np.arange(mesh.n_elements)[:, None, None] * npts + local[None]).reshape(-1, 3)
    tri = mtri.Triangulation(samples.point[:, 0], samples.point[:, 1], tris)
    ax.tripcolor(tri, samples.checker.astype(float), shading="gouraud", cmap="gray", vmin=0, vmax=1)
    for (a, b) in mesh.bnd_edges:
        ax.plot(*mesh.nodes[[a, b]].T, "r-", lw=0.8)
    ax.set_aspect("equal")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
