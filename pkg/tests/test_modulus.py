import warnings

import numpy as np
import pytest

from conjfun.conjugate import build_conjugate_system, solve_hole_potentials
from conjfun.fem.assembly import assemble, solve_primary
from conjfun.mesh import GradingRule
from conjfun.modulus import (CanonicalDomain, MapDomainError, ModulusReport, conformal_map, extract_canonical,
                             modulus, reciprocal_error, reference_lattice, sample_map)
from conjfun.pipeline import prepare_mesh, run
from domains import quarter_torus, rectangle, segments_5, two_holes


def solve_all(spec, h, p, grading=None):
    mesh = prepare_mesh(spec, h, grading)
    sys = assemble(mesh, spec.chart, p)
    u = solve_primary(sys)
    setup = solve_hole_potentials(sys)
    v = solve_primary(build_conjugate_system(sys, setup))
    M = modulus(sys, u)
    return mesh, sys, u, v, setup, M, modulus(sys, v)


def test_reci_on_published_digits():
    assert reciprocal_error(0.7901907691109106, 1.2655172762842442) == pytest.approx(6.987019163240404e-08, rel=1e-6)
    assert reciprocal_error(3.7, 1 / 3.7) < 1e-15
    with pytest.raises(ValueError):
        reciprocal_error(0.0, 1.0)


@pytest.mark.parametrize("h", [0.5, 2.0, 3.7])
def test_rectangle_moduli(h):
    _, _, _, _, _, M, Mc = solve_all(rectangle(h), min(h, 1.0) / 2, 2)
    assert M == pytest.approx(h, abs=1e-10)
    assert Mc == pytest.approx(1 / h, abs=1e-10)


def test_rectangle_map_is_identity():
    h = 1.7
    mesh, _, u, v, _, M, _ = solve_all(rectangle(h), 0.4, 2)
    phi = conformal_map(u, v, M)
    pts = np.array([[0.1, 0.2], [0.5, 1.0], [0.93, 1.6], [0.33, 0.01]])
    np.testing.assert_allclose(phi(pts), pts, atol=1e-12)


def test_unit_square_corner_images():
    _, _, u, v, _, M, _ = solve_all(rectangle(), 0.5, 1)
    corners = np.array([[0.0, 1.0], [0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])  # z1..z4
    np.testing.assert_allclose(conformal_map(u, v, M)(corners), [[0, 1], [0, 0], [1, 0], [1, 1]], atol=1e-10)
    np.testing.assert_allclose(conformal_map(u, v, M, origin="z1")(corners), [[0, 0], [0, 1], [1, 1], [1, 0]],
                               atol=1e-10)


def test_map_outside_domain():
    _, _, u, v, _, M, _ = solve_all(rectangle(), 0.5, 1)
    with pytest.raises(MapDomainError):
        conformal_map(u, v, M)([[1.5, 0.5]])
    with pytest.raises(ValueError):
        conformal_map(u, v, M, origin="z3")


def test_hole_images_are_horizontal_slits():
    spec = two_holes(centers=((0.3, 0.2), (0.7, 0.75)), radii=(0.15, 0.2))
    mesh, sys, u, v, setup, M, Mc = solve_all(spec, 0.3, 6)
    reci = reciprocal_error(M, Mc)
    can = extract_canonical(conformal_map(u, v, M), spec, setup)
    assert len(can.slits) == 2 and can.h == M
    for (z, d), s, dl in zip(can.slits, can.spread, setup.delta):
        assert s < 10 * reci
        assert z[1] == pytest.approx(M * dl)
        assert 0 < z[0] and z[0] + d < 1 and d > 0


def test_no_holes_gives_bare_rectangle():
    res = run(prepare_mesh(rectangle(2.0), 0.5), None, 2, rectangle(2.0), estimate_errors=False)
    assert res.report.canonical.slits == []
    assert res.report.canonical.h == pytest.approx(2.0, abs=1e-12)
    d = res.report.to_dict()
    assert d["h_from_conjugate"] == pytest.approx(2.0, abs=1e-12)


def test_samples_stay_in_the_rectangle():
    spec = two_holes()
    _, _, u, v, _, M, Mc = solve_all(spec, 0.3, 6, GradingRule(0.15, 6))
    eps = 10 * reciprocal_error(M, Mc)
    img = sample_map(conformal_map(u, v, M), density=3).image
    assert img[:, 0].min() >= -eps and img[:, 0].max() <= 1 + eps
    assert img[:, 1].min() >= -eps and img[:, 1].max() <= M + eps


def test_lattice_density_one_is_vertices():
    np.testing.assert_array_equal(reference_lattice(1), [[0, 0], [1, 0], [0, 1]])
    with pytest.raises(ValueError):
        reference_lattice(0)


def test_unit_square_checkerboard_has_four_cells():
    _, _, u, v, _, M, _ = solve_all(rectangle(), 0.25, 1)
    s = sample_map(conformal_map(u, v, M), density=4, k=2)
    cells = {(int(np.floor(2 * a + 1e-12)), int(np.floor(2 * b + 1e-12))) for a, b in s.image}
    assert {c for c in cells if max(c) < 2} == {(0, 0), (0, 1), (1, 0), (1, 1)}
    parity = {(i, j): (i + j) % 2 for i, j in cells}
    inner = [(a, b) for a, b in s.image if max(a, b) < 1 - 1e-9]
    for (a, b), c in zip(s.image, s.checker):
        if max(a, b) < 1 - 1e-9:
            assert c == parity[int(2 * a + 1e-12), int(2 * b + 1e-12)]
    assert inner


def test_torus_map_monotone_in_first_parameter():
    spec = quarter_torus()
    _, _, u, v, _, M, _ = solve_all(spec, 0.6, 6)
    phi = conformal_map(u, v, M)
    for y in (0.3, 1.5, 2.9):
        line = np.column_stack([np.linspace(0.01, np.pi - 0.01, 40), np.full(40, y)])
        assert np.all(np.diff(phi(line)[:, 0]) > 0)


def solve_on(mesh, p):
    sys = assemble(mesh, None, p)
    setup = solve_hole_potentials(sys)
    return modulus(sys, solve_primary(sys)), modulus(sys, solve_primary(build_conjugate_system(sys, setup))), setup.delta


def test_conformal_invariance_under_similarity():
    spec = two_holes(centers=((0.3, 0.2), (0.7, 0.75)), radii=(0.15, 0.2))
    mesh = prepare_mesh(spec, 0.3, GradingRule(0.15, 2))
    M, Mc, d = solve_on(mesh, 4)
    for s, rot, shift in ((2.5, 0.0, (0.0, 0.0)), (0.4, 0.3, (1.0, -2.0))):
        M2, Mc2, d2 = solve_on(mesh.transformed(s, rot, shift), 4)
        assert M2 == pytest.approx(M, abs=1e-10)
        assert Mc2 == pytest.approx(Mc, abs=1e-10)
        np.testing.assert_allclose(d2, d, atol=1e-10)


@pytest.mark.slow
def test_planar_and_hemisphere_canonical_domains_differ():
    outs = []
    for hemi in (False, True):
        spec = segments_5(hemisphere=hemi)
        res = run(prepare_mesh(spec, 5.0, GradingRule(0.15, 2)), spec.chart, 3, spec, estimate_errors=False)
        outs.append(res.report.canonical)
    a = np.array([[z[0], z[1], d] for z, d in outs[0].slits])
    b = np.array([[z[0], z[1], d] for z, d in outs[1].slits])
    assert a.shape == b.shape == (5, 3)
    assert np.abs(a - b).max() > 1e-3


def test_report_serialises():
    rep = ModulusReport(2.0, 0.5, np.array([0.25]), CanonicalDomain(2.0, [((0.1, 0.5), 0.3)], [0.0]))
    d = rep.to_dict()
    assert d["reci"] == 0.0 and d["canonical"]["slits"][0]["d"] == 0.3


def test_slit_outside_rectangle_warns():
    from conjfun.modulus import ConsistencyWarning
    spec = two_holes()
    _, _, u, v, setup, M, _ = solve_all(spec, 0.4, 2)
    bad = conformal_map(u, v, M)
    bad.u = type(u)(u.x * 3.0, u.system)  # scaled primary pushes slits past u = 1
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        extract_canonical(bad, spec, setup)
    assert any(issubclass(x.category, ConsistencyWarning) for x in w)
