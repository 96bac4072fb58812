from __future__ import annotations

import numpy as np
import pytest

from phason_stab import _accel
from phason_stab.model import GPA, assemble_system, quasicrystal_params


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


@pytest.fixture(scope="session")
def dissipative_A():
    """Dissipative system at chi = 0.1 GPa, phi = 19."""
    return assemble_system("dissipative", quasicrystal_params(chi=0.1 * GPA, phi=19))


@pytest.fixture
def numpy_backend():
    previous = _accel.set_backend("numpy")
    yield
    _accel.set_backend(previous)


def random_unit(rng, n):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {name}: {detail}")
