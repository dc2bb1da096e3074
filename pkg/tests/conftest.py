import re

import pytest

from ricci_willmore.manifold import GeodesicBallDomain, RotSymManifold
from ricci_willmore.ode import solve_psi_pair
from ricci_willmore.profiles import DecayProfile

_CRITERIA = {}


@pytest.fixture(scope="session", autouse=True)
def warm_solver():
    # first call compiles the RK4 kernel; keep that out of timed tests
    solve_psi_pair(DecayProfile.zero(), 0.1, 1e-2)


@pytest.fixture(scope="session")
def bump_profile():
    return DecayProfile.smooth_bump(0.1, 1.0, 2.0)


@pytest.fixture(scope="session")
def bump_manifold(bump_profile):
    return RotSymManifold(2, bump_profile)


@pytest.fixture(scope="session")
def hyperbolic2():
    return RotSymManifold(2)


@pytest.fixture(scope="session")
def exp_manifold():
    return RotSymManifold(2, DecayProfile.exponential(0.5, 2.0))


@pytest.fixture
def ball():
    def make(manifold, r0):
        return GeodesicBallDomain(manifold, r0)
    return make


def pytest_runtest_logreport(report):
    match = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not match:
        return
    key = (int(match.group(1)), match.group(2))
    failed = report.failed
    _CRITERIA[key] = _CRITERIA.get(key, False) or failed


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (number, name), failed in sorted(_CRITERIA.items()):
        status = "FAIL" if failed else "PASS"
        terminalreporter.write_line(f"criterion {number} {name.replace('_', ' ')}: {status}")
