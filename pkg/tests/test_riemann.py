import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wedgetrack import curves, gas, riemann
from conftest import GAMMA

U0 = (2.0, 0.05, 1.0, 1.4)
small = st.floats(-0.05, 0.05)


@given(small, small, small, small)
def test_round_trip_alpha(a1, a2, a3, a4):
    # [DERIVED] solve_riemann inverts phi
    Ur = curves.phi((a1, a2, a3, a4), U0, GAMMA)
    sol = riemann.solve_riemann(U0, Ur, GAMMA)
    assert np.allclose(sol.alphas, (a1, a2, a3, a4), atol=1e-9, rtol=0)
    assert np.max(np.abs(np.array(sol.states[4]) - np.array(Ur))) < 1e-11


@given(small, small, small, small)
def test_fan_rh_and_ordering(a1, a2, a3, a4):
    Ur = curves.phi((a1, a2, a3, a4), U0, GAMMA)
    sol = riemann.solve_riemann(U0, Ur, GAMMA)
    m = sol.states
    s1m, s1p, s23, s4m, s4p = sol.speeds
    # a zero-strength wave may come back as a +-1e-16 shock, so the edges
    # of a degenerate fan are only ordered up to roundoff
    assert s1m <= s1p + 1e-14 and s4m <= s4p + 1e-14
    assert s1p < s23 < s4m
    if sol.alphas[0] < 0:
        assert gas.rh_residual(m[0], m[1], s1m, GAMMA) < 1e-10
    if sol.alphas[3] < 0:
        assert gas.rh_residual(m[3], m[4], s4m, GAMMA) < 1e-10
    # the contact carries no pressure or normal velocity jump
    assert gas.rh_residual(m[1], m[3], s23, GAMMA) < 1e-10


def test_trivial_problem():
    sol = riemann.solve_riemann(U0, U0, GAMMA)
    assert sol.alphas == (0.0, 0.0, 0.0, 0.0)


def test_fan_eval_is_continuous_in_rarefactions():
    Ur = curves.phi((0.04, 0.0, 0.0, 0.03), U0, GAMMA)
    sol = riemann.solve_riemann(U0, Ur, GAMMA)
    s1m, s1p, _, s4m, s4p = sol.speeds
    lo = riemann.riemann_fan_eval(sol, (0, 0), s1m + 1e-12, GAMMA)
    hi = riemann.riemann_fan_eval(sol, (0, 0), s1p - 1e-12, GAMMA)
    assert np.allclose(lo, sol.states[0], atol=1e-10)
    assert np.allclose(hi, sol.states[1], atol=1e-10)
    assert np.allclose(riemann.riemann_fan_eval(sol, (0, 0), s4p + 1.0, GAMMA), Ur)


@given(st.floats(0.6, 1.6))
def test_boundary_pressure_wave_hits_pressure(p2):
    U1 = (2.0, 0.0, 1.0, 1.4)
    out = riemann.boundary_pressure_wave(U1, p2, GAMMA)
    assert out.boundary_state[2] == pytest.approx(p2, rel=1e-11)
    # compression gives a shock, expansion a rarefaction
    assert (out.delta1 < 0) == (p2 > 1.0)
    if out.delta1 < 0:
        s = curves.wave_speed(U1, out.boundary_state, 1, out.delta1, GAMMA)
        assert gas.rh_residual(U1, out.boundary_state, s, GAMMA) < 1e-10


def test_reflection_of_4_wave_is_pressure_preserving():
    U1 = (2.0, 0.0, 1.0, 1.4)
    b4 = 0.01
    p_t = curves.phi((0, 0, 0, b4), U1, GAMMA)[2]
    out = riemann.boundary_reflection(U1, 0.0, 0.0, b4, GAMMA)
    assert out.boundary_state[2] == pytest.approx(p_t, rel=1e-12)


def test_inverse_riemann_background(background):
    Um, Up, s0, pb = background
    U, s, slope = riemann.solve_inverse_riemann(Um, pb, GAMMA)
    assert s == pytest.approx(s0, rel=1e-14)
    assert abs(slope) < 1e-14


@given(st.floats(-0.02, 0.02), st.floats(-0.02, 0.02), st.floats(-0.02, 0.02))
def test_strong_resolve_round_trip(ds, d2, d4):
    Um = (2.0, 0.0, 1.0, 1.4)
    s0 = curves.shock_polar_state(Um, 1.5, GAMMA)[1]
    s = s0 + ds * 0.1
    G = curves.strong_shock_by_speed(s, Um, GAMMA)
    Ur = curves.phi((0.0, d2, 0.0, d4), G, GAMMA)
    out = riemann.strong_resolve(Um, Ur, GAMMA)
    assert out.s == pytest.approx(s, abs=1e-9)
    assert np.allclose(out.deltas, (d2, 0.0, d4), atol=1e-9)
    assert gas.rh_residual(Um, out.behind, out.s, GAMMA) < 1e-10


def test_reflection_factor_below_one(background):
    # the strong shock damps reflected waves at the background
    Um, Up, s0, _ = background
    f = riemann.reflection_factor(Um, Up, s0, GAMMA)
    assert 0 < f < 1


def test_Ks4_matches_linearized_polar(background):
    # [DERIVED] linearize the strong shock plus a 4-wave in the (angle, pressure)
    # plane: a 1-wave beta1 from above reflects into beta4 with the strong shock
    # absorbing the angle and pressure changes along its polar.
    Um, Up, s0, _ = background
    Ks = riemann.coefficients_Ks(Um, s0, GAMMA)
    h = 1e-6

    def ang_p(U):
        return np.array([math.atan2(U[1], U[0]), U[2]])
    d1 = (ang_p(curves.wave_curve(Up, 1, h, GAMMA)) - ang_p(Up)) / h
    d4 = (ang_p(curves.wave_curve(Up, 4, h, GAMMA)) - ang_p(Up)) / h
    pp = ang_p(curves.shock_polar_state(Um, Up[2] + h, GAMMA)[0])
    dpol = (pp - ang_p(Up)) / h
    # x dpol + K4 d4 = d1  (x: pressure change along the polar)
    x, K4 = np.linalg.solve(np.column_stack([dpol, d4]), d1)
    assert Ks[3] == pytest.approx(K4, rel=1e-3)


def test_glimm_delta():
    # [TRIVIAL] approaching different families and same-family shocks count
    a = (0.0, 0.0, 0.0, 0.1)
    b = (0.2, 0.0, 0.0, 0.0)
    assert riemann.glimm_delta(a, b) == pytest.approx(0.02)
    assert riemann.glimm_delta(b, a) == 0.0
    assert riemann.glimm_delta((-0.1, 0, 0, 0), (0.2, 0, 0, 0)) == pytest.approx(0.02)
    assert riemann.glimm_delta((0.1, 0, 0, 0), (0.2, 0, 0, 0)) == 0.0


def test_newton_raises_when_no_root():
    with pytest.raises(riemann.SolverError):
        riemann.newton(lambda x: np.array([x[0] ** 2 + 1.0]), [1.0], maxit=20)
