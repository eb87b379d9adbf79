import numpy as np
import pytest

from acfnet.model import SystemParams


@pytest.fixture
def bell():
    return SystemParams(scheme="bell", Omega=0.05, Omega_MW=0.015, delta=0.05, gamma=0.1, kappa_fiber=0.1)


@pytest.fixture
def klm():
    return SystemParams(scheme="klm", Omega=0.05, Omega_MW=0.005, delta=0.005, gamma=0.1, kappa_fiber=0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_density(d, rng, rank=None):
    rank = rank or d
    A = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = A @ A.conj().T
    return rho / np.trace(rho).real


_criteria = {}


@pytest.fixture
def report():
    def _report(number, ok, detail):
        _criteria[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    return _report


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_criteria):
            terminalreporter.write_line(_criteria[n])
