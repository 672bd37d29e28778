import numpy as np
import pytest

from riemsecant import manifolds as M
from riemsecant.fields import VectorFieldProblem

MANIFOLDS = [M.Euclidean(3), M.Sphere(3), M.SPD(2)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


def random_pair(manifold, rng, max_dist=1.0):
    p = M.random_point(manifold, rng)
    q = M.exp_map(p, M.random_tangent(p, rng, length=rng.uniform(0.05, max_dist)))
    return p, q


def euclid3_problem():
    """Smooth nonlinear field on E(3) with an analytic derivative."""
    m = M.Euclidean(3)

    def field(p):
        x, y, z = p.coords
        return np.array([x * x - y + np.sin(z), y * z + x, np.exp(0.3 * x) - z * z])

    def deriv(p, v):
        x, y, z = p.coords
        jac = np.array([
            [2 * x, -1.0, np.cos(z)],
            [1.0, z, y],
            [0.3 * np.exp(0.3 * x), 0.0, -2 * z],
        ])
        return jac @ v.vec

    return VectorFieldProblem(m, field, "euclid3-test", cov_derivative=deriv)


# one line per acceptance criterion in the terminal summary
_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.failed:
        _acceptance[name] = "FAIL"
    elif report.skipped:
        _acceptance.setdefault(name, "SKIP")
    elif report.when == "call" and _acceptance.get(name) != "FAIL":
        _acceptance[name] = "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in sorted(_acceptance.items()):
        terminalreporter.write_line(f"{status}  {name}")
