"""
Potentials of a disk with two holes
===================================

The conjugate problem needs a constant on each hole. Those constants come
from the reduced energy, and the holes become horizontal slits of the
canonical domain.
"""

from pathlib import Path

from conjfun import io
from conjfun.cli import load_domain_config
from conjfun.geometry import DomainSpec
from conjfun.mesh import GradingRule
from conjfun.modulus import sample_map
from conjfun.pipeline import prepare_mesh, run

out = Path("demo_out")
out.mkdir(exist_ok=True)

# the built-in disk: holes of radius 1/4 on the diagonal
spec = DomainSpec.from_config(load_domain_config("two_holes_disk"))
mesh = prepare_mesh(spec, 0.25, GradingRule(0.15, 8))
res = run(mesh, None, 8, spec)

# mirror symmetry in y = x puts both potentials at 1/2
print("delta =", res.setup.delta, " reci =", res.report.reci)
for (z, d) in res.report.canonical.slits:
    print(f"slit at height {z[1]:.6f} from u = {z[0]:.6f}, length {d:.6f}")

# the canonical rectangle and the checkerboard pulled back to the disk
io.plot_canonical(out / "two_holes_canonical.svg", res.report.canonical, "two holes")
io.plot_map(out / "two_holes_map.svg", sample_map(res.phi, 4, 8), mesh, 4, "two holes")
