"""The three-step computation: primary problem, conjugate construction, conjugate problem."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from conjfun.conjugate import ConjugateSetup, build_conjugate_system, solve_hole_potentials
from conjfun.errorest import ErrorEstimate, auxiliary_system, estimate, overkill_error
from conjfun.fem.assembly import AssembledSystem, Solution, assemble, solve_primary
from conjfun.geometry import DomainSpec, SurfaceChart
from conjfun.mesh import GradingRule, Mesh, generate_mesh, grade_toward_singularities
from conjfun.modulus import (CanonicalDomain, ConformalMap, ModulusReport, conformal_map,
                             extract_canonical, modulus)

CSV_COLUMNS = ("p", "N", "M", "M_conj", "reci", "eta_primary", "eta_conjugate",
               "err_primary", "err_conjugate", "t_integration", "t_conjugate_construction", "t_solve")


def prepare_mesh(spec: DomainSpec, h: float, grading: GradingRule | None = None) -> Mesh:
    mesh = generate_mesh(spec, h)
    if grading is not None and grading.levels > 0:
        mesh = grade_toward_singularities(mesh, grading)
    return mesh


@dataclass
class RunResult:
    p: int
    system: AssembledSystem
    conjugate_system: AssembledSystem
    primary: Solution
    conjugate: Solution
    setup: ConjugateSetup
    report: ModulusReport
    phi: ConformalMap
    timings: dict
    factorizations: int
    est_primary: ErrorEstimate | None = None
    est_conjugate: ErrorEstimate | None = None
    err_primary: float | None = None
    err_conjugate: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.system.ndof

    def row(self) -> dict:
        nan = float("nan")
        return {
            "p": self.p, "N": self.N, "M": self.report.M, "M_conj": self.report.M_conj,
            "reci": self.report.reci,
            "eta_primary": self.est_primary.eta if self.est_primary else nan,
            "eta_conjugate": self.est_conjugate.eta if self.est_conjugate else nan,
            "err_primary": nan if self.err_primary is None else self.err_primary,
            "err_conjugate": nan if self.err_conjugate is None else self.err_conjugate,
            "t_integration": self.timings["integration"],
            "t_conjugate_construction": self.timings["conjugate_construction"],
            "t_solve": self.timings["solve"],
        }


def solve_moduli(mesh: Mesh, chart: SurfaceChart | None, p: int):
    """Steps 1-3 on one mesh; returns ``(sys, csys, u, v, setup, timings)``.

    One factorization per role: the primary free block, and the conjugate free
    block which serves both the hole potentials and the conjugate solve.
    """
    sys = assemble(mesh, chart, p)
    st = sys.stats
    t0 = time.perf_counter()
    u = solve_primary(sys)
    t_primary = time.perf_counter() - t0
    fac0 = st.timings.get("factorization", 0.0)
    setup = solve_hole_potentials(sys)
    fac_conj = st.timings.get("factorization", 0.0) - fac0
    csys = build_conjugate_system(sys, setup)
    t0 = time.perf_counter()
    v = solve_primary(csys)
    t_conj = time.perf_counter() - t0
    timings = {
        "integration": st.timings["integration"],
        "conjugate_construction": setup.timings["construction"],
        "factorization": st.timings.get("factorization", 0.0),
        "solve": t_primary + fac_conj + t_conj,
    }
    return sys, csys, u, v, setup, timings


def run(mesh: Mesh, chart: SurfaceChart | None, p: int, spec: DomainSpec | None = None,
        estimate_errors: bool = True, overkill: int | None = None, samples: int = 200,
        origin: str = "z2") -> RunResult:
    """Full computation at degree ``p``.

    With ``overkill=k`` the same problem is also solved at degree ``p + k`` on
    the same mesh and the energy-norm distances are reported as error proxies.
    """
    sys, csys, u, v, setup, timings = solve_moduli(mesh, chart, p)
    factorizations = sys.stats.factorizations
    M, Mc = modulus(sys, u), modulus(csys, v)
    phi = conformal_map(u, v, M, origin)
    canonical = extract_canonical(phi, spec, setup, samples) if mesh.n_holes else CanonicalDomain(M)
    report = ModulusReport(M, Mc, setup.delta.copy(), canonical)
    res = RunResult(p, sys, csys, u, v, setup, report, phi, timings, factorizations)
    if estimate_errors:
        t0 = time.perf_counter()
        aux = auxiliary_system(sys)
        res.est_primary = estimate(sys, u, aux)
        res.est_conjugate = estimate(csys, v, aux)
        res.timings["estimation"] = time.perf_counter() - t0
    if overkill:
        _, _, uo, vo, _, _ = solve_moduli(mesh, chart, p + overkill)
        res.err_primary = overkill_error(u, uo)
        res.err_conjugate = overkill_error(v, vo)
    return res


def study(mesh: Mesh, chart: SurfaceChart | None, ps, spec: DomainSpec | None = None,
          estimate_errors: bool = True, overkill: int | None = None, samples: int = 200) -> list[RunResult]:
    """One run per degree on a fixed mesh."""
    return [run(mesh, chart, p, spec, estimate_errors, overkill, samples) for p in ps]


def fit_exponential_rate(N, reci):
    """Least-squares line ``log(reci) ~ a + b N^(1/3)``; returns ``(b, a, r2)``."""
    x = np.asarray(N, dtype=float) ** (1.0 / 3.0)
    y = np.log(np.asarray(reci, dtype=float))
    b, a = np.polyfit(x, y, 1)
    resid = y - (a + b * x)
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss if ss > 0 else 1.0
    return float(b), float(a), float(r2)
