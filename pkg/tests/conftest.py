import sys
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from brickstress.assembly import MaterialModel
from brickstress.mesh import global_dof_map, unit_cube_mesh
from brickstress.ref_element import FULL, RIGID, nodal_basis

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])


@pytest.fixture(scope="session")
def full_element():
    return nodal_basis(FULL)


@pytest.fixture(scope="session")
def rigid_element():
    return nodal_basis(RIGID)


@pytest.fixture(scope="session")
def material():
    """E = 1, nu = 0.3."""
    return MaterialModel.from_engineering(1, Fraction(3, 10))


@pytest.fixture
def mesh2(full_element):
    mesh = unit_cube_mesh(2)
    return mesh, global_dof_map(mesh, full_element)
