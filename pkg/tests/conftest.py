from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from fractal_riesz.digit_search import amplify, find_digit_system
from fractal_riesz.ifs_core import make_ifs
from fractal_riesz.spectrum import build_spectrum, choose_q1

settings.register_profile(
    "invariants",
    max_examples=200,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def cantor():
    return make_ifs(3, [0, 2])


@pytest.fixture(scope="session")
def lebesgue():
    return make_ifs(2, [0, 1])


@pytest.fixture(scope="session")
def twodim():
    return make_ifs([[2, 1], [0, 2]], [[0, 0], [1, 0]])


@pytest.fixture(scope="session")
def cantor_system(cantor):
    return find_digit_system(cantor, 0.24)


@pytest.fixture(scope="session")
def cantor_spectrum(cantor, cantor_system):
    """Default pipeline on the Cantor-3 measure: q = (2, 4, 8), 324 points."""
    sched = choose_q1(cantor_system.rho)
    return build_spectrum(cantor, cantor_system, 5, 3, sched)


@pytest.fixture(scope="session")
def small_spectrum(cantor, cantor_system):
    """N = 2 with q = (2, 4): 4 + 64 points."""
    return build_spectrum(cantor, cantor_system, 5, 2, [2, 4])


@pytest.fixture(scope="session")
def amplified_pair(lebesgue):
    ds = find_digit_system(lebesgue, 0.24)
    return lebesgue, amplify(ds, 2)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
