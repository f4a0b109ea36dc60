import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import solve_ivp

from wedgetrack import curves, gas
from conftest import GAMMA

U0 = (2.0, 0.05, 1.0, 1.4)


def _ode_curve(U, j, alpha):
    # integral curve of r_j, the oracle for the closed-form isentrope
    f = lambda t, y: gas.eigenvectors(y, GAMMA)[j - 1]
    sol = solve_ivp(f, (0.0, alpha), np.array(U, float), method="DOP853", rtol=1e-13, atol=1e-14)
    return sol.y[:, -1]


@pytest.mark.parametrize("j", [1, 4])
@pytest.mark.parametrize("alpha", [0.1, 0.02, -0.05])
def test_isentrope_matches_integral_curve(j, alpha):
    # [DERIVED] closed form vs DOP853 integration of r_j
    closed = np.array(curves.isentrope_state(U0, j, alpha, GAMMA))
    ode = _ode_curve(U0, j, alpha)
    assert np.max(np.abs(closed - ode)) < 1e-10


@given(st.sampled_from([1, 4]), st.floats(0.001, 0.2))
def test_parameter_is_lambda_increment(j, alpha):
    # [DERIVED] r_j . grad lambda_j = 1 makes alpha the lambda_j increment
    U = curves.rarefaction_curve(U0, j, alpha, GAMMA)
    dl = gas.char_speed(U, GAMMA, j) - gas.char_speed(U0, GAMMA, j)
    assert dl == pytest.approx(alpha, rel=1e-11, abs=1e-13)


@given(st.sampled_from([1, 4]), st.floats(0.001, 0.2))
def test_rarefaction_keeps_entropy_and_bernoulli(j, alpha):
    U = curves.rarefaction_curve(U0, j, alpha, GAMMA)
    assert gas.entropy(U, GAMMA) == pytest.approx(gas.entropy(U0, GAMMA), rel=1e-13)
    assert gas.bernoulli(U, GAMMA) == pytest.approx(gas.bernoulli(U0, GAMMA), rel=1e-13)


@given(st.sampled_from([1, 4]), st.floats(-0.3, -1e-4))
def test_shock_branch_rh_lax_entropy(j, alpha):
    U, s = curves.shock_curve(U0, j, alpha, GAMMA)
    assert gas.rh_residual(U0, U, s, GAMMA) < 1e-10
    assert curves.lax_check(U0, U, j, s, GAMMA)
    assert curves.density_increases_downstream(U0, U, j)
    # entropy grows across the shock in the flow direction
    assert gas.entropy(U, GAMMA) != gas.entropy(U0, GAMMA)
    assert gas.bernoulli(U, GAMMA) == pytest.approx(gas.bernoulli(U0, GAMMA), rel=1e-12)


@pytest.mark.parametrize("j", [1, 4])
def test_shock_and_isentrope_third_order_contact(j):
    # [DERIVED] |S_j - R_j| = O(alpha^3): halving alpha divides the gap by 8
    gaps = []
    for a in (-0.08, -0.04, -0.02):
        S = np.array(curves.shock_curve(U0, j, a, GAMMA)[0])
        R = np.array(curves.isentrope_state(U0, j, a, GAMMA))
        gaps.append(np.max(np.abs(S - R)))
    ratios = [gaps[k] / gaps[k + 1] for k in range(2)]
    assert all(7.0 < r < 9.0 for r in ratios)


@given(st.sampled_from([1, 4]), st.floats(-0.2, 0.2))
def test_alpha_density_round_trip(j, alpha):
    U = curves.wave_curve(U0, j, alpha, GAMMA)
    if alpha >= 0:
        back = curves.alpha_from_density(U0, j, U[3], GAMMA)
    else:
        back = curves.alpha_from_density(U0, j, curves.isentrope_density(U0, j, alpha, GAMMA), GAMMA)
    assert back == pytest.approx(alpha, abs=1e-12)


def test_wave_curve_is_c2_at_zero():
    # second differences across 0 match those on one side
    for j in (1, 4):
        h = 1e-3
        f = lambda a: np.array(curves.wave_curve(U0, j, a, GAMMA))
        d2c = (f(h) - 2 * f(0.0) + f(-h)) / h ** 2
        d2r = (f(2 * h) - 2 * f(h) + f(0.0)) / h ** 2
        assert np.max(np.abs(d2c - d2r)) < 5e-2 * max(1.0, np.max(np.abs(d2r)))


def test_contact_curve():
    # [TRIVIAL]
    U = curves.contact_curve(U0, 0.1, -0.2)
    assert U[0] / U[1] == pytest.approx(U0[0] / U0[1])
    assert U[2] == U0[2]
    assert U[3] == pytest.approx(U0[3] * math.exp(-0.2))


def test_prandtl_meyer_angle_mach_2():
    # [DERIVED] standard table value nu(2) = 26.3798 deg at gamma 1.4
    assert math.degrees(curves.pm_nu(2.0, GAMMA)) == pytest.approx(26.3798, abs=1e-4)


def _theta_beta_mach(M, beta, g):
    return math.atan(2 / math.tan(beta) * (M * M * math.sin(beta) ** 2 - 1)
                     / (M * M * (g + math.cos(2 * beta)) + 2))


@pytest.mark.parametrize("pb", [1.2, 1.5, 2.5])
def test_shock_polar_against_oblique_shock_relations(pb):
    # [DERIVED] theta-beta-M relation and normal-shock pressure ratio
    c = math.sqrt(GAMMA / 1.4)
    Um = (2 * c, 0.0, 1.0, 1.4)
    Up, s = curves.shock_polar_state(Um, pb, GAMMA)
    beta = -math.atan(s)              # shock lies below the flow, angle measured from it
    Mn2 = 4.0 * math.sin(beta) ** 2
    assert pb == pytest.approx(1 + 2 * GAMMA / (GAMMA + 1) * (Mn2 - 1), rel=1e-12)
    theta = -math.atan2(Up[1], Up[0])
    assert theta == pytest.approx(_theta_beta_mach(2.0, beta, GAMMA), rel=1e-10)
    assert gas.rh_residual(Um, Up, s, GAMMA) < 1e-12


def test_background_flow_is_turned_parallel(background):
    Um, Up, s0, pb = background
    assert Up[2] == pytest.approx(pb, rel=1e-14)
    assert abs(Up[1]) < 1e-14
    assert s0 < gas.char_speed(Um, GAMMA, 1)
    assert gas.is_supersonic(Up, GAMMA)


def test_critical_pressure_is_sonic(background):
    Um = background[0]
    pc = curves.critical_pressure(Um, GAMMA)
    U, _ = curves.shock_polar_state(Um, pc, GAMMA, check=False)
    assert gas.mach(U, GAMMA) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(gas.DomainError):
        curves.shock_polar_state(Um, pc * 1.01, GAMMA)


@given(st.floats(-0.4, -0.3))
def test_strong_shock_speed_round_trip(s_off):
    Um = (2.0, 0.0, 1.0, 1.4)
    lam1 = gas.char_speed(Um, GAMMA, 1)
    s = lam1 + s_off * 0.5
    r = curves.strong_shock_ratio(s, Um, GAMMA)
    U, s_back = curves.strong_shock_state(Um, r, GAMMA)
    assert s_back == pytest.approx(s, abs=1e-13)
    assert gas.rh_residual(Um, U, s, GAMMA) < 1e-10


def test_rarefaction_rejects_negative_alpha():
    with pytest.raises(ValueError):
        curves.rarefaction_curve(U0, 1, -0.1, GAMMA)
    with pytest.raises(curves.CurveExitError):
        curves.isentrope_state(U0, 4, -5.0, GAMMA)
