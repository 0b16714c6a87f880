import math

import numpy as np
import pytest

from conjfun.fem import basis
from conjfun.fem.assembly import (AssemblyAuditError, DofMap, Solution, assemble, make_partition,
                                  solve_dirichlet, solve_primary)
from conjfun.fem.basis import local_dofs
from conjfun.geometry import PLANE, IdentityChart, make_hemisphere_chart
from conjfun.mesh import GradingRule, generate_mesh, grade_toward_singularities
from conjfun.modulus import modulus
from domains import SQRT3, quarter_torus, rectangle, slit_square, two_holes


def interpolate_linear(sys, f_grad, f0=0.0):
    """Exact coefficients of a linear function: vertex values, higher modes zero."""
    x = np.zeros(sys.ndof)
    x[: sys.mesh.n_nodes] = f0 + sys.mesh.nodes @ np.asarray(f_grad)
    return x


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_unit_square_energy_of_x(p):
    sys = assemble(generate_mesh(rectangle(), 1.0), None, p)
    x = interpolate_linear(sys, [1.0, 0.0])
    assert x @ sys.A @ x == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("spec,chart", [(two_holes(), None), (quarter_torus(), "torus"), (slit_square(), None)])
def test_symmetry_and_row_sums(spec, chart):
    m = grade_toward_singularities(generate_mesh(spec, 0.4), GradingRule(0.2, 2))
    sys = assemble(m, spec.chart, 5)
    assert abs(sys.A - sys.A.T).max() == 0.0
    scale = abs(sys.A).max()
    assert np.abs(sys.A @ np.r_[np.ones(m.n_nodes), np.zeros(sys.ndof - m.n_nodes)]).max() <= 1e-12 * scale


def test_partition_covers_and_orders():
    m = generate_mesh(two_holes(), 0.3)
    dm = DofMap(m, 3)
    for role in ("primary", "conjugate"):
        part = make_partition(dm, role)
        order = part.order
        assert np.array_equal(np.sort(order), np.arange(dm.ndof))
        assert len(part.E) == 2 and all(len(e) for e in part.E)
    prim = make_partition(dm, "primary")
    # corners go to the Dirichlet sets
    corners = m.meta["corners"]
    assert set(corners) <= set(prim.D0) | set(prim.D1)
    conj = make_partition(dm, "conjugate")
    assert set(corners) <= set(conj.D0) | set(conj.D1)
    sys = assemble(m, None, 3)
    Ab, order = sys.blocked()
    assert np.array_equal(order, prim.order)
    assert abs(Ab - Ab.T).max() == 0


def test_identity_chart_object_is_bitwise_equal_to_no_chart():
    m = generate_mesh(two_holes(), 0.3)
    a = assemble(m, None, 4).A
    b = assemble(m, IdentityChart(), 4).A
    c = assemble(m, PLANE, 4).A
    assert (a != b).nnz == 0 and (a != c).nnz == 0


def test_rectangle_solution_is_x():
    sys = assemble(generate_mesh(rectangle(2.0), 0.5), None, 3)
    u = solve_primary(sys)
    for e in range(0, sys.mesh.n_elements, 5):
        val, g, surf = u.evaluate(e, [0.2, 0.3])
        xy = sys.mesh.nodes[sys.mesh.elements[e]]
        pt = xy[0] + 0.2 * (xy[1] - xy[0]) + 0.3 * (xy[2] - xy[0])
        assert val == pytest.approx(pt[0], abs=1e-12)
        np.testing.assert_allclose(surf, [1.0, 0.0, 0.0], atol=1e-12)
    assert modulus(sys, u) == pytest.approx(2.0, abs=1e-12)


def test_evaluate_rejects_outside_points():
    sys = assemble(generate_mesh(rectangle(), 1.0), None, 2)
    u = solve_primary(sys)
    with pytest.raises(ValueError):
        u.evaluate(0, [0.8, 0.8])


def test_constant_has_zero_gradient():
    sys = assemble(generate_mesh(two_holes(), 0.3), None, 4)
    x = np.zeros(sys.ndof)
    x[: sys.mesh.n_nodes] = 3.0
    val, g, surf = Solution(x, sys).evaluate(7, [0.3, 0.3])
    assert val == pytest.approx(3.0, abs=1e-13)
    assert np.abs(surf).max() < 1e-12


def test_hemisphere_tangential_gradient_of_x_is_shorter():
    spec = rectangle(chart=make_hemisphere_chart((0, 0, 1, 1)), grade_corners=False)
    sys = assemble(generate_mesh(spec, 0.25), spec.chart, 2)
    x = interpolate_linear(sys, [1.0, 0.0])
    sol = Solution(x, sys)
    norms = np.array([np.linalg.norm(sol.evaluate(e, [1 / 3, 1 / 3])[2]) for e in range(sys.mesh.n_elements)])
    # equality only where the surface has no slope in x
    assert np.all(norms <= 1.0 + 1e-14)
    assert np.mean(norms < 1.0 - 1e-3) > 0.5


def test_patch_test_quadratic_trace():
    # u = x^2 - y^2 is harmonic and lies in the p = 2 space of an affine mesh
    m = generate_mesh(rectangle(), 0.3)
    sys = assemble(m, None, 2)
    dm = sys.dofmap
    f = lambda q: q[..., 0] ** 2 - q[..., 1] ** 2  # noqa: E731
    edges = dm.edges
    vals, _ = basis.evaluate(2, np.array([[0.5, 0.0]]))
    k = next(i for i, d in enumerate(local_dofs(2)) if d.kind == "edge" and d.entity == 0)
    x = np.zeros(sys.ndof)
    x[: m.n_nodes] = f(m.nodes)
    bump = f(m.nodes[edges].mean(axis=1)) - f(m.nodes[edges]).mean(axis=1)
    x[dm.edge_dof(np.arange(len(edges)), 2)] = bump / vals[0, k]
    bnd_nodes = np.unique(m.bnd_edges)
    bnd = {tuple(sorted(e)) for e in m.bnd_edges.tolist()}
    on_bnd = np.array([tuple(sorted(e)) in bnd for e in edges.tolist()])
    bdofs = np.concatenate([bnd_nodes, dm.edge_dof(np.flatnonzero(on_bnd), 2)])
    y, _ = solve_dirichlet(sys.A, bdofs, x[bdofs])
    np.testing.assert_allclose(y, x, atol=1e-12)


def test_energy_monotone_in_p():
    spec = slit_square()
    m = grade_toward_singularities(generate_mesh(spec, 0.25), GradingRule(0.15, 4))
    energies = [modulus(s, solve_primary(s)) for s in (assemble(m, None, p) for p in range(1, 11))]
    assert np.all(np.diff(energies) <= 1e-13)


def test_quarter_torus_converges_to_sqrt3():
    spec = quarter_torus()
    m = generate_mesh(spec, 0.6)
    sys = assemble(m, spec.chart, 8)
    assert modulus(sys, solve_primary(sys)) == pytest.approx(SQRT3, abs=1e-9)


@pytest.mark.parametrize("name", ["two_holes", "torus", "slit"])
def test_quadrature_sufficiency(name):
    spec = {"two_holes": two_holes, "torus": quarter_torus, "slit": slit_square}[name]()
    m = grade_toward_singularities(generate_mesh(spec, 0.4), GradingRule(0.15, 3))
    p = 6
    base = assemble(m, spec.chart, p)
    M0 = modulus(base, solve_primary(base))
    # doubling the quadrature order: order 2p+4 -> 4p+8
    hi = assemble(m, spec.chart, p, order_shift=2 * p + 4)
    M1 = modulus(hi, solve_primary(hi))
    assert abs(M1 - M0) < 1e-12


def test_indefinite_free_block_is_reported():
    sys = assemble(generate_mesh(rectangle(), 0.5), None, 2)
    bad = sys.with_conditions(sys.partition, np.zeros(0, dtype=int), np.zeros(0))
    with pytest.raises(AssemblyAuditError):
        solve_primary(bad)


def test_elementwise_curved_map_has_exact_circle_area():
    m = generate_mesh(two_holes(), 0.5)
    assert m.area(curved=True) == pytest.approx(math.pi * (1 - 1 / 8), abs=1e-12)
