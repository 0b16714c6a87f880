"""
Slits on a hemisphere
=====================

Lifting the slit square onto a hemisphere changes the moduli and the
canonical domain, but not the rate of convergence.
"""

from conjfun.cli import load_domain_config
from conjfun.geometry import DomainSpec
from conjfun.mesh import GradingRule
from conjfun.pipeline import fit_exponential_rate, prepare_mesh, run

spec = DomainSpec.from_config(load_domain_config("hemisphere_segments_5"))
# corners are graded too: the hemisphere metric degenerates there
mesh = prepare_mesh(spec, 5.0, GradingRule(0.15, 8))

for label, chart in (("plane", None), ("hemisphere", spec.chart)):
    runs = [run(mesh, chart, p, spec, estimate_errors=False) for p in range(2, 9)]
    slope, _, _ = fit_exponential_rate([r.N for r in runs], [r.report.reci for r in runs])
    last = runs[-1].report
    print(f"{label:10s} M={last.M:.10f} reci={last.reci:.1e} slope={slope:.3f}")
    print("   slit heights", [round(z[1], 4) for z, _ in last.canonical.slits])
