import numpy as np
import pytest

from kronstap import _backend


@pytest.fixture(params=_backend.available())
def backend(request):
    """Run the test once per available kernel backend."""
    with _backend.use_backend(request.param):
        yield request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_psd(rng, dim, rank=None):
    g = crandn(rng, dim, dim if rank is None else rank)
    m = g @ g.conj().T
    return 0.5 * (m + m.conj().T)


def random_hermitian(rng, dim):
    g = crandn(rng, dim, dim)
    return 0.5 * (g + g.conj().T)


#: "PASS/FAIL criterion k: ..." lines recorded by the acceptance suite
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
