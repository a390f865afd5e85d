import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from doublephase.mesh import Field, build_interval_mesh, build_rectangle_mesh  # noqa: E402
from doublephase.problem import DoublePhaseProblem, constant_weight, power_reaction, power_weight  # noqa: E402


def random_interior(mesh, rng, low=-1.0, high=1.0):
    v = np.zeros(mesh.n_vertices)
    v[mesh.interior_nodes] = rng.uniform(low, high, len(mesh.interior_nodes))
    return Field(mesh, v)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def ground_problem():
    """p=2, q=1.5, a(z)=1e-3|z-1/2|, f(x)=x^3 on (0,1), 256 cells."""
    return DoublePhaseProblem(2.0, 1.5, build_interval_mesh(1.0, 256), power_weight(0.5, 1.0, 1e-3),
                              power_reaction(4, 2.0))


@pytest.fixture(scope="session")
def nodal_problem():
    return DoublePhaseProblem(2.0, 1.5, build_interval_mesh(1.0, 256), constant_weight(1e-3), power_reaction(4, 2.0))


@pytest.fixture(scope="session")
def square_problem():
    return DoublePhaseProblem(3.0, 2.0, build_rectangle_mesh(1.0, 1.0, 12, 12), power_weight([0.5, 0.5], 1.0),
                              power_reaction(4, 3.0))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
