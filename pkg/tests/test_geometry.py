import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conjfun.geometry import (PLANE, ChartDomainError, CurveSegment, DomainSpec, GeometryError,
                              InvalidParameterError, MetricDegenerateError, SurfaceChart, chart_from_config,
                              circle, make_hemisphere_chart, make_torus_chart, metric_coefficient, polygon,
                              random_slits, register_chart)
from domains import rectangle, two_holes

TORUS = make_torus_chart(0.5, 1.5)
HEMI = make_hemisphere_chart((0.0, 0.0, 1.0, 1.0))


def fd_jacobian(chart, uv, eps=1e-6):
    uv = np.asarray(uv, dtype=float)
    cols = []
    for a in range(2):
        d = np.zeros(2)
        d[a] = eps
        cols.append((chart(uv + d) - chart(uv - d)) / (2 * eps))
    return np.stack(cols, axis=-1)


def test_torus_point():
    np.testing.assert_allclose(TORUS([0.0, 0.0]), [1.5, 0.0, 0.0], atol=1e-15)


def test_torus_metric_by_hand():
    np.testing.assert_allclose(TORUS.first_fundamental_form([math.pi / 2, 0.3]), np.diag([0.25, 1.0]), atol=1e-15)
    for u in np.linspace(0, math.pi, 7):
        C = metric_coefficient(TORUS, [u, 1.1])
        np.testing.assert_allclose(C, np.diag([2 + math.cos(u), 1 / (2 + math.cos(u))]), rtol=1e-14, atol=1e-15)


def test_torus_parameters_validated():
    for r, R in [(0.0, 1.0), (-1.0, 2.0), (1.0, 1.0), (2.0, 1.0)]:
        with pytest.raises(InvalidParameterError):
            make_torus_chart(r, R)


def test_identity_chart():
    pts = np.random.default_rng(0).uniform(-3, 3, (5, 2))
    np.testing.assert_array_equal(PLANE.first_fundamental_form(pts), np.broadcast_to(np.eye(2), (5, 2, 2)))
    np.testing.assert_array_equal(PLANE.metric_coefficient(pts), np.broadcast_to(np.eye(2), (5, 2, 2)))


def test_hemisphere_heights():
    assert HEMI([0.0, 0.0])[2] == pytest.approx(0.0, abs=1e-15)
    assert HEMI([0.5, 0.5])[2] == pytest.approx(math.sqrt(2) / 2, rel=1e-15)
    big = make_hemisphere_chart((0.0, 0.0, 40.0, 40.0))
    assert big([20.0, 20.0])[2] == pytest.approx(20 * math.sqrt(2), rel=1e-15)
    np.testing.assert_allclose(metric_coefficient(HEMI, [0.5, 0.5]), np.eye(2), atol=1e-15)
    with pytest.raises(ChartDomainError):
        HEMI([1.2, 1.2])


@pytest.mark.parametrize("chart,uv", [(TORUS, [0.4, 1.3]), (TORUS, [2.9, 0.1]), (HEMI, [0.3, 0.6]), (HEMI, [0.9, 0.2])])
def test_analytic_jacobians_match_finite_differences(chart, uv):
    np.testing.assert_allclose(chart.jacobian(uv), fd_jacobian(chart, uv), atol=1e-8)


@settings(max_examples=50, deadline=None)
@given(u=st.floats(0.02, 0.98), v=st.floats(0.02, 0.98), which=st.sampled_from(["torus", "hemi"]))
def test_metric_coefficient_unimodular_and_spd(u, v, which):
    chart = TORUS if which == "torus" else HEMI
    uv = np.array([u, v]) * (math.pi if which == "torus" else 1.0)
    if which == "hemi" and np.linalg.norm(uv - 0.5) > 0.69:
        return
    C = metric_coefficient(chart, uv)
    # det(G^-1 sqrt(det G)) = 1 for any 2x2 SPD G
    assert np.linalg.det(C) == pytest.approx(1.0, rel=1e-10)
    np.testing.assert_allclose(C, C.T, atol=1e-15)
    assert np.all(np.linalg.eigvalsh(C) > 0)


def test_degenerate_metric_reports_location():
    flat = SurfaceChart(lambda uv: np.stack([uv[..., 0], 0 * uv[..., 0], 0 * uv[..., 0]], -1),
                        lambda uv: np.broadcast_to(np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]]), uv.shape[:-1] + (3, 2)))
    with pytest.raises(MetricDegenerateError) as err:
        flat.metric_coefficient(np.array([[0.1, 0.2]]))
    assert err.value.location is not None


def test_chart_configs():
    assert chart_from_config(None) is PLANE
    t = chart_from_config({"type": "torus", "r": 0.5, "R": 1.5})
    np.testing.assert_allclose(t([0.0, 0.0]), [1.5, 0, 0])
    h = chart_from_config({"type": "hemisphere"}, (0, 0, 1, 1))
    assert h([0.5, 0.5])[2] == pytest.approx(math.sqrt(0.5))
    register_chart("plane-again", lambda: PLANE)
    assert chart_from_config({"type": "custom", "name": "plane-again"}) is PLANE
    with pytest.raises(GeometryError):
        chart_from_config({"type": "klein"})


def test_corner_points_and_orientation():
    spec = rectangle(2.0)
    np.testing.assert_allclose(spec.corner_points, [[0, 2], [0, 0], [1, 0], [1, 2]])
    with pytest.raises(GeometryError):
        DomainSpec(outer=polygon([(0, 0), (0, 1), (1, 1), (1, 0)]), corners=(0, 1, 2, 3))  # clockwise
    with pytest.raises(GeometryError):
        DomainSpec(outer=polygon([(0, 0), (1, 0), (1, 1), (0, 1)]), corners=(0, 2, 1, 3))


def test_conflicts_name_both_pieces():
    with pytest.raises(GeometryError, match="slit0 and slit1"):
        rectangle(slits=[np.array([[0.2, 0.2], [0.8, 0.8]]), np.array([[0.2, 0.8], [0.8, 0.2]])])
    with pytest.raises(GeometryError):
        rectangle(slits=[np.array([[0.5, 0.5], [1.5, 0.5]])])
    with pytest.raises(GeometryError):
        two_holes(centers=((0.3, 0.3), (0.5, 0.5)))


def test_segment_validation():
    with pytest.raises(GeometryError):
        CurveSegment("polyline", points=[[0, 0]])
    with pytest.raises(GeometryError):
        CurveSegment("arc", center=(0, 0), radius=0.0, theta0=0, theta1=1)
    arc = circle((1.0, 2.0), 0.5)[1]
    np.testing.assert_allclose(arc.start, [1.0, 2.5], atol=1e-15)
    pts, arcs = arc.discretize(0.1)
    assert np.allclose(np.linalg.norm(pts - [1.0, 2.0], axis=1), 0.5)
    assert all(a is not None for a in arcs)


def test_config_round_trip():
    spec = two_holes()
    again = DomainSpec.from_config(spec.to_config())
    assert again.to_config() == spec.to_config()


def test_random_slits_seeded():
    a = random_slits(5, 7, (0, 0, 40, 40))
    b = random_slits(5, 7, (0, 0, 40, 40))
    c = random_slits(5, 8, (0, 0, 40, 40))
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not all(np.array_equal(x, y) for x, y in zip(a, c))
    rectangle(40.0, 40.0, slits=a)  # valid: disjoint and inside


def test_transformed_domain():
    spec = rectangle(2.0).transformed(3.0, 0.5, (1.0, -2.0))
    L = np.linalg.norm(spec.corner_points[0] - spec.corner_points[1])
    assert L == pytest.approx(6.0)
