import numpy as np
import pytest

from hyperquadric.catalog import catalog
from hyperquadric.classify import T_SAMPLES

# every catalog build exercised by the verification suites
CATALOG_BUILDS = (
    [("q2_clifford", {})]
    + [("case1", {"n": n}) for n in (2, 3, 5)]
    + [("case2", {"n": n}) for n in (3, 5)]
    + [("q4_case1", {})]
    + [("q4_family", {"t": t}) for t in T_SAMPLES]
    + [("q4_case2", {})]
)


def build_id(item):
    name, params = item
    if not params:
        return name
    key, val = next(iter(params.items()))
    if isinstance(val, complex):
        return f"{name}-t{np.angle(val):+.3f}"
    return f"{name}-{key}{val}"


@pytest.fixture(scope="session")
def catalog_entries():
    return [(build_id(b), catalog(b[0], **b[1])) for b in CATALOG_BUILDS]


@pytest.fixture(params=CATALOG_BUILDS, ids=[build_id(b) for b in CATALOG_BUILDS])
def entry(request):
    name, params = request.param
    return catalog(name, **params)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
