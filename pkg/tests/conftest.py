import numpy as np
import pytest

from riemflow.bench import InstanceSpec, generate
from riemflow.manifolds import SPD, Euclidean, Hemisphere


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


MANIFOLDS = {
    "euclidean": lambda: Euclidean(5),
    "hemisphere": lambda: Hemisphere(6),
    "spd": lambda: SPD(4),
}


@pytest.fixture(params=sorted(MANIFOLDS))
def manifold(request):
    return MANIFOLDS[request.param]()


@pytest.fixture(scope="session")
def eigen_desk():
    spec = InstanceSpec.desk("eigenvalue")
    return generate(spec), spec


@pytest.fixture(scope="session")
def karcher_desk():
    spec = InstanceSpec.desk("karcher")
    return generate(spec), spec


@pytest.fixture(scope="session")
def flat_desk():
    spec = InstanceSpec.desk("flat")
    return generate(spec), spec


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        ok, detail = mod.RESULTS[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
