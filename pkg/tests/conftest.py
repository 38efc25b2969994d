import math

import pytest

from reglab.heckefield import ImagQuadField, hecke_characters
from reglab.lattice import make_lattice


@pytest.fixture(scope="session")
def gaussian():
    return make_lattice(1, 1j)


@pytest.fixture(scope="session")
def eisenstein():
    return make_lattice(1, complex(-0.5, math.sqrt(3) / 2))


@pytest.fixture(scope="session")
def sqrt7():
    return make_lattice(1, complex(0.5, math.sqrt(7) / 2))


@pytest.fixture(scope="session")
def qi():
    return ImagQuadField(-4)


@pytest.fixture(scope="session")
def desk_characters(qi):
    """Both admissible phi_fin for K = Q(i), g = (3)."""
    return hecke_characters(qi, "3")


@pytest.fixture(scope="session")
def desk_config():
    return {"D": -4, "modulus": "3", "phi_fin_index": 0, "chi_exponents": [1],
            "twist_primes": ["2+i", "2-i"]}


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line():
    """Record a one-line pass/fail summary for the terminal report."""
    def record(line: str):
        ACCEPTANCE_LINES.append(line)
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
