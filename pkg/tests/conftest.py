import numpy as np
import pytest

from localme.bath import BathSpec
from localme.filtered import CouplingChannel
from localme.linalg import SX, SZ, kron

I2 = np.eye(2, dtype=complex)

# criterion number -> (passed, detail); filled by test_acceptance.py
CRITERIA = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        ok, detail = CRITERIA[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def qubit():
    """H = 0.5 Z + X, A = 0.5 Z, beta = 1."""
    return 0.5 * SZ + SX, 0.5 * SZ, BathSpec(1.0)


@pytest.fixture
def qubit_full(qubit):
    h, a, spec = qubit
    return h, CouplingChannel(a, spec, "full_line")


@pytest.fixture
def qubit_half(qubit):
    h, a, spec = qubit
    return h, CouplingChannel(a, spec, "half_line")


@pytest.fixture
def two_qubit():
    h = (0.5 * kron(SZ, I2) - 0.7 * kron(I2, SZ) + 0.3 * kron(SZ, SZ)
         + kron(SX, I2) + kron(I2, SX))
    return h, CouplingChannel(0.5 * kron(SZ, I2), BathSpec(1.0), "full_line")


def random_hermitian(rng, d, scale=1.0):
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (x + x.conj().T) / 2


def random_density(rng, d):
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    r = x @ x.conj().T
    return r / np.trace(r)
