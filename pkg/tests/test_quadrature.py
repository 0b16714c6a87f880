from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conjfun.fem.quadrature import gauss_legendre, triangle_rule


def monomial_integral(a, b):
    # integral of x^a y^b over the reference triangle
    return factorial(a) * factorial(b) / factorial(a + b + 2)


@pytest.mark.parametrize("order", [0, 1, 2, 5, 10, 24])
def test_weights_sum_to_area(order):
    pts, w = triangle_rule(order)
    assert w.sum() == pytest.approx(0.5, abs=1e-15)
    assert np.all(w > 0)
    assert np.all(pts >= 0) and np.all(pts.sum(axis=1) <= 1)


@settings(max_examples=60, deadline=None)
@given(order=st.integers(0, 26), a=st.integers(0, 26), b=st.integers(0, 26))
def test_monomials_exact_up_to_order(order, a, b):
    if a + b > order:
        return
    pts, w = triangle_rule(order)
    val = np.sum(w * pts[:, 0] ** a * pts[:, 1] ** b)
    assert val == pytest.approx(monomial_integral(a, b), rel=1e-12, abs=1e-16)


def test_gauss_legendre_exactness():
    x, w = gauss_legendre(6)
    for k in range(12):
        assert np.sum(w * x ** k) == pytest.approx(1 / (k + 1), rel=1e-13)
