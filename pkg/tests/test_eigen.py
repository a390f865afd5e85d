import math

import numpy as np
import pytest

from conftest import random_interior
from doublephase.eigen import (
    EigenOptions,
    bump,
    first_eigenpair,
    lemma1_diagnostic,
    rayleigh_quotient,
    theta_quotient,
)
from doublephase.energy import gradient_integrals
from doublephase.mesh import Field, build_interval_mesh, integrate_power
from doublephase.problem import DoublePhaseProblem, power_reaction, power_weight
from oracles import closed_form_p_eigenvalue, p_laplace_eigenvalue_shooting

# frozen from the shooting oracle (agrees with the closed form to 1e-14)
LAMBDA_P3 = 28.28876197600233


@pytest.fixture(scope="module")
def eig3():
    return first_eigenpair(build_interval_mesh(1.0, 256), 3.0)


def test_shooting_oracle_agrees_with_closed_form():
    assert p_laplace_eigenvalue_shooting(3.0) == pytest.approx(LAMBDA_P3, rel=1e-10)
    assert closed_form_p_eigenvalue(3.0) == pytest.approx(LAMBDA_P3, rel=1e-12)
    assert closed_form_p_eigenvalue(2.0) == pytest.approx(math.pi**2, rel=1e-14)


def test_laplace_eigenvalue_1d():
    res = first_eigenpair(build_interval_mesh(1.0, 256), 2.0)
    assert res.converged
    assert res.lambda1 == pytest.approx(math.pi**2, rel=1e-4)
    assert res.lambda1 >= math.pi**2  # conforming Galerkin bounds from above


def test_p3_eigenvalue(eig3):
    assert eig3.converged
    assert eig3.lambda1 == pytest.approx(LAMBDA_P3, rel=1e-3)


def test_eigenfunction_normalized_positive(eig3):
    u = eig3.u1
    assert integrate_power(u, 3.0) == pytest.approx(1.0, rel=1e-12)
    assert np.all(u.values[u.mesh.interior_nodes] > 0)
    assert eig3.boundary_slope < 0


def test_trace_nonincreasing(eig3):
    assert np.all(np.diff(eig3.trace) <= 1e-14 * eig3.trace[0])


def test_scaling_with_length():
    res = first_eigenpair(build_interval_mesh(2.0, 256), 2.0)
    assert res.lambda1 == pytest.approx(math.pi**2 / 4, rel=1e-4)


def test_rayleigh_bounds_random_fields(rng, eig3):
    m = eig3.u1.mesh
    for _ in range(10):
        u = random_interior(m, rng)
        assert rayleigh_quotient(m, 3.0, u) >= eig3.lambda1 - 1e-10


def test_rayleigh_rejects_zero():
    m = build_interval_mesh(1.0, 8)
    with pytest.raises(ValueError):
        rayleigh_quotient(m, 2.0, Field.zeros(m))
    with pytest.raises(ValueError):
        first_eigenpair(m, 1.0)


def test_bump_unit_peak():
    b = bump(build_interval_mesh(1.0, 8))
    assert b.sup_norm == pytest.approx(1.0)


def test_max_iters_reported():
    res = first_eigenpair(build_interval_mesh(1.0, 128), 3.0, EigenOptions(max_iters=1))
    assert not res.converged and res.iterations == 1


def ray_problem(mesh):
    return DoublePhaseProblem(3.0, 2.0, mesh, power_weight(0.5, 1.0), power_reaction(4, 3.0))


def test_theta_homogeneity_identity(eig3):
    pb = ray_problem(eig3.u1.mesh)
    _, gq = gradient_integrals(pb, eig3.u1.values)
    for t in (0.5, 3.0, 40.0):
        direct = theta_quotient(pb, eig3.u1 * t)
        closed = eig3.lambda1 + t ** (pb.q - pb.p) * pb.p / pb.q * gq
        assert direct == pytest.approx(closed, rel=1e-12)


def test_theta_above_lambda(rng, eig3):
    pb = ray_problem(eig3.u1.mesh)
    for _ in range(10):
        assert theta_quotient(pb, random_interior(pb.mesh, rng)) >= eig3.lambda1 - 1e-10


def test_quotient_gap_slope(eig3):
    pb = ray_problem(eig3.u1.mesh)
    tab = lemma1_diagnostic(pb, np.geomspace(10, 1e4, 13), eig=eig3)
    assert tab.slope == pytest.approx(-1.0, rel=1e-6)
    assert np.all(tab.rows[:, 2] >= 0)
    assert np.all(np.diff(tab.rows[:, 2]) < 0)


def test_quotient_gap_grid_validation(eig3):
    pb = ray_problem(eig3.u1.mesh)
    for grid in ([], [1.0, 0.5], [0.0, 1.0]):
        with pytest.raises(ValueError):
            lemma1_diagnostic(pb, grid, eig=eig3)
