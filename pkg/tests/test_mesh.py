import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_interior
from doublephase.mesh import (
    Field,
    build_interval_mesh,
    build_rectangle_mesh,
    gradient,
    integrate_power,
    interval_mesh_from_points,
    negative_part,
    positive_part,
)
from oracles import hat, quad


def test_interval_mesh_uniform():
    m = build_interval_mesh(1.0, 4)
    assert np.allclose(m.vertices[:, 0], [0, 0.25, 0.5, 0.75, 1])
    assert m.n_elements == 4
    assert np.allclose(m.element_measures, 0.25)
    assert list(m.boundary_nodes) == [0, 4]


def test_interval_cover_identity():
    m = build_interval_mesh(math.pi, 2)
    assert abs(m.element_measures.sum() - math.pi) <= 1e-12 * math.pi


@pytest.mark.parametrize("args", [(1.0, 1), (0.0, 4), (-1.0, 4), (1.0, 2.5)])
def test_interval_invalid(args):
    with pytest.raises(ValueError):
        build_interval_mesh(*args)


def test_rectangle_counts():
    m = build_rectangle_mesh(1, 1, 2, 2)
    assert m.n_vertices == 9 and m.n_elements == 8
    assert abs(m.element_measures.sum() - 1) <= 1e-12
    assert sorted(m.boundary_nodes) == [0, 1, 2, 3, 5, 6, 7, 8]


def test_rectangle_area():
    m = build_rectangle_mesh(2, 1, 4, 2)
    assert m.n_elements == 16
    assert abs(m.element_measures.sum() - 2) <= 1e-12 * 2


@pytest.mark.parametrize("args", [(1, 1, 1, 1), (1, 0, 2, 2), (1, 1, 2, 1)])
def test_rectangle_invalid(args):
    with pytest.raises(ValueError):
        build_rectangle_mesh(*args)


def test_boundary_nodes_are_perimeter():
    m = build_rectangle_mesh(2.0, 1.0, 5, 3)
    x, y = m.vertices.T
    on = np.isclose(x, 0) | np.isclose(x, 2) | np.isclose(y, 0) | np.isclose(y, 1)
    assert set(np.flatnonzero(on)) == set(m.boundary_nodes)


def test_field_rejects_boundary_values():
    m = build_interval_mesh(1.0, 4)
    with pytest.raises(ValueError):
        Field(m, [1, 0, 0, 0, 0])
    with pytest.raises(ValueError):
        Field(m, [0, 0, 0])


def test_hat_gradient():
    m = build_interval_mesh(1.0, 2)
    h = 1.7
    u = Field(m, [0, h, 0])
    assert np.allclose(gradient(u)[:, 0], [2 * h, -2 * h])
    assert np.all(gradient(Field.zeros(m)) == 0)


def test_linear_reproduction_2d():
    m = build_rectangle_mesh(1.0, 1.0, 6, 6)
    u = Field.interpolate(m, lambda x: x[:, 0])
    g = gradient(u)
    interior = ~np.isin(m.elements, m.boundary_nodes).any(axis=1)
    assert interior.any()
    assert np.allclose(g[interior], [1.0, 0.0], atol=1e-12)


def test_integrate_hat_square():
    m = build_interval_mesh(1.0, 2)
    u = Field(m, [0, 1, 0])
    expected = quad(lambda x: hat(x) ** 2)  # = 1/3
    assert integrate_power(u, 2) == pytest.approx(expected, rel=1e-13)
    assert integrate_power(u, 2) == pytest.approx(1 / 3, rel=1e-13)


def test_integrate_zero_and_invalid():
    m = build_interval_mesh(1.0, 8)
    assert integrate_power(Field.zeros(m), 3.3) == 0
    with pytest.raises(ValueError):
        integrate_power(Field.zeros(m), 0.5)


def test_integrate_constant_interior():
    # plateau of height 1 with a single boundary cell on each side
    n = 400
    m = build_interval_mesh(1.0, n)
    u = Field.interpolate(m, lambda x: np.ones(len(x)))
    exact = 1.0 - 1.0 / n  # trapezoid-shaped interpolant, s=1
    assert integrate_power(u, 1) == pytest.approx(exact, rel=1e-12)
    assert abs(integrate_power(u, 2) - 1.0) < 0.01


def test_quadrature_degree_2d():
    m = build_rectangle_mesh(1.0, 1.0, 3, 3)
    xq = m.quad_points
    # degree-4 polynomial integrates exactly
    val = m.integrate(xq[..., 0] ** 3 * xq[..., 1])
    assert val == pytest.approx(1 / 8, rel=1e-12)


def test_positive_negative_parts():
    m = build_interval_mesh(1.0, 4)
    u = Field(m, [0, -1, 0, 2, 0])
    assert list(positive_part(u).values) == [0, 0, 0, 2, 0]
    assert list(negative_part(u).values) == [0, 1, 0, 0, 0]
    w = Field(m, [0, 1, 0, 2, 0])
    assert np.array_equal(positive_part(w).values, w.values)
    assert not np.any(negative_part(w).values)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_parts_identities(seed):
    rng = np.random.default_rng(seed)
    m = build_interval_mesh(1.0, 9)
    u = random_interior(m, rng)
    assert np.array_equal(positive_part(u).values - negative_part(u).values, u.values)
    assert np.array_equal(positive_part(-u).values, negative_part(u).values)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-5, 5), st.floats(-5, 5))
def test_gradient_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    m = build_rectangle_mesh(1.0, 2.0, 4, 5)
    u, v = random_interior(m, rng), random_interior(m, rng)
    lhs = gradient(a * u + b * v)
    rhs = a * gradient(u) + b * gradient(v)
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-12 * (1 + abs(a) + abs(b)) * 20)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1, 6))
def test_integrate_power_nonnegative(seed, s):
    rng = np.random.default_rng(seed)
    m = build_interval_mesh(1.0, 7)
    u = random_interior(m, rng)
    assert integrate_power(u, s) > 0
    assert integrate_power(Field.zeros(m), s) == 0


def test_nonuniform_mesh():
    m = interval_mesh_from_points([0, 0.1, 0.5, 1.0])
    assert list(m.boundary_nodes) == [0, 3]
    assert m.element_measures.sum() == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        interval_mesh_from_points([0, 0.5, 0.5, 1])
