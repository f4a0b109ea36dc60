import math

import numpy as np
import pytest
from hypothesis import settings

from wedgetrack.scenario import Scenario

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

GAMMA = 1.4

# criterion number -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} AC{n}: {detail}")


@pytest.fixture(scope="session")
def background():
    """(Um, Up, s0, pb_bar) for M=2, p=1, rho=1.4, pb_bar=1.5."""
    return Scenario().background_states()


@pytest.fixture(scope="session")
def Up(background):
    return background[1]


def perturbed(U, d, rng):
    """U with a random relative perturbation of size d."""
    return tuple(np.asarray(U) * (1.0 + d * rng.uniform(-1, 1, 4)))


def complex_step_jacobians(fW, fH, U, h=1e-30):
    U = np.asarray(U, dtype=complex)
    JW = np.zeros((4, 4))
    JH = np.zeros((4, 4))
    for k in range(4):
        e = np.zeros(4, dtype=complex)
        e[k] = 1j * h
        JW[:, k] = np.imag(fW(U + e)) / h
        JH[:, k] = np.imag(fH(U + e)) / h
    return JW, JH
