import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wedgetrack import gas
from conftest import GAMMA, complex_step_jacobians


def _fluxes(gamma):
    # complex-safe copies of the flux formulas
    def fW(U):
        u, v, p, rho = U
        E = gamma * p / ((gamma - 1) * rho) + 0.5 * (u * u + v * v)
        return np.array([rho * u, rho * u * u + p, rho * u * v, rho * u * E])

    def fH(U):
        u, v, p, rho = U
        E = gamma * p / ((gamma - 1) * rho) + 0.5 * (u * u + v * v)
        return np.array([rho * v, rho * u * v, rho * v * v + p, rho * v * E])
    return fW, fH


supersonic = st.builds(
    lambda M, th, p, rho: (M * math.sqrt(GAMMA * p / rho) * math.cos(th),
                           M * math.sqrt(GAMMA * p / rho) * math.sin(th), p, rho),
    st.floats(1.3, 4.0), st.floats(-0.3, 0.3), st.floats(0.3, 5.0), st.floats(0.3, 5.0))


def test_flux_formulas_match_complex_copies():
    U = (2.1, 0.3, 1.2, 0.9)
    fW, fH = _fluxes(GAMMA)
    assert np.allclose(gas.flux_W(U, GAMMA), fW(np.array(U)), rtol=1e-15)
    assert np.allclose(gas.flux_H(U, GAMMA), fH(np.array(U)), rtol=1e-15)


@given(supersonic)
def test_eigenpairs(U):
    # [DERIVED] (dH - lambda dW) r = 0 with complex-step Jacobians
    fW, fH = _fluxes(GAMMA)
    JW, JH = complex_step_jacobians(fW, fH, U)
    lam = gas.eigenvalues(U, GAMMA)
    R = gas.eigenvectors(U, GAMMA)
    for j in range(4):
        r = R[j]
        res = (JH - lam[j] * JW) @ r
        assert np.max(np.abs(res)) < 1e-8 * max(1.0, np.max(np.abs(JW @ r)))


@given(supersonic, st.sampled_from([1, 4]))
def test_genuine_nonlinearity_normalization(U, j):
    # [DERIVED] r_j . grad lambda_j = 1 by central differences
    r = gas.eigenvectors(U, GAMMA)[j - 1]
    h = 1e-6
    Up = np.asarray(U) + h * r
    Um = np.asarray(U) - h * r
    d = (gas.char_speed(Up, GAMMA, j) - gas.char_speed(Um, GAMMA, j)) / (2 * h)
    assert d == pytest.approx(1.0, abs=1e-6)


def test_eigenvalue_ordering_and_degenerate_pair():
    U = (2.0, 0.2, 1.0, 1.4)
    l1, l2, l3, l4 = gas.eigenvalues(U, GAMMA)
    assert l1 < l2 == l3 < l4
    assert l2 == pytest.approx(0.1)


def test_mach_angle_at_zero_flow_angle():
    # [DERIVED] for v = 0, lambda_4 = tan(mach angle) = 1/sqrt(M^2 - 1)
    c = math.sqrt(GAMMA * 1.0 / 1.4)
    U = (2.0 * c, 0.0, 1.0, 1.4)
    lam = gas.eigenvalues(U, GAMMA)
    assert lam[3] == pytest.approx(1.0 / math.sqrt(3.0), rel=1e-14)
    assert lam[0] == pytest.approx(-lam[3], rel=1e-14)


def test_subsonic_and_bad_states_raise():
    with pytest.raises(gas.NotSupersonicError):
        gas.eigenvalues((0.5, 0.0, 1.0, 1.0), GAMMA)
    with pytest.raises(gas.DomainError):
        gas.sound_speed((1.0, 0.0, -1.0, 1.0), GAMMA)
    with pytest.raises(ValueError):
        gas.GasParams(gamma=1.0)


def test_bernoulli_is_energy_over_mass_flux():
    # [TRIVIAL]
    U = (2.3, -0.4, 0.8, 1.1)
    W = gas.flux_W(U, GAMMA)
    assert gas.bernoulli(U, GAMMA) == pytest.approx(W[3] / W[0], rel=1e-14)


def test_rh_residual_zero_for_equal_states():
    U = (2.0, 0.1, 1.0, 1.4)
    assert gas.rh_residual(U, U, 0.3, GAMMA) == 0.0
    assert gas.mach((2.0, 0.0, 1.0, 1.4), GAMMA) == pytest.approx(2.0 / math.sqrt(1.0))
