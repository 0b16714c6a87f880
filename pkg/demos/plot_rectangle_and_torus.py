"""
Moduli with closed forms
========================

The rectangle [0, 1] x [0, h] has modulus h, and the quarter torus
[0, pi]^2 on the torus with radii 1/2 and 3/2 has modulus sqrt(3).
"""

import math

from conjfun import DomainSpec, generate_mesh, run
from conjfun.geometry import make_torus_chart, polygon

# a 1 x 2 rectangle; corners z1..z4 start at (0, 2) and run counter-clockwise
spec = DomainSpec(outer=polygon([(0, 0), (1, 0), (1, 2), (0, 2)]), corners=(3, 0, 1, 2))
res = run(generate_mesh(spec, 0.5), None, 2, spec)
print("rectangle: M =", res.report.M, " reci =", res.report.reci)

# the same square of parameters lifted to the torus
torus = DomainSpec(outer=polygon([(0, 0), (math.pi, 0), (math.pi, math.pi), (0, math.pi)]),
                   corners=(3, 0, 1, 2), chart=make_torus_chart(0.5, 1.5))
mesh = generate_mesh(torus, 0.6)
for p in (2, 4, 6, 8):
    res = run(mesh, torus.chart, p, torus, estimate_errors=False)
    print(f"torus p={p}: M = {res.report.M:.16f}  error = {abs(res.report.M - math.sqrt(3)):.1e}")
