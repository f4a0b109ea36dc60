"""Riemann-type solvers: weak-wave decomposition, free-boundary problems and
interactions with the strong 1-shock."""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .curves import (
    alpha_from_density, contact_curve, density_ratio_for_pressure, hugoniot_speed,
    hugoniot_state, isentrope_state, phi, phi_chain, shock_polar_state, wave_curve,
)
from .gas import DomainError, FlowState, char_speed, eigenvalues, eigenvectors

NEWTON_TOL = 1e-11
FD_STEP = 1e-7


class SolverError(RuntimeError):
    """Newton iteration failed to converge."""


class RiemannSolution(NamedTuple):
    alphas: tuple
    states: tuple       # U_m0 .. U_m4
    speeds: tuple       # (s1-, s1+, s23, s4-, s4+)


class BoundaryRiemannSolution(NamedTuple):
    delta1: float
    boundary_state: FlowState


class StrongInteraction(NamedTuple):
    s: float
    deltas: tuple       # (d2, d3, d4)
    behind: FlowState   # state just above the strong shock
    states: tuple       # behind, after d2/d3, after d4


def newton(F, x0, jac=None, tol=NEWTON_TOL, maxit=50, step=FD_STEP):
    """Damped Newton for F(x) = 0 with forward-difference Jacobians."""
    x = np.array(x0, dtype=float)
    f = np.asarray(F(x), dtype=float)
    res = np.max(np.abs(f))
    n = len(x)
    for it in range(maxit):
        if res <= 1e-15:
            break
        if jac is not None:
            J = jac(x, f)
        else:
            J = np.empty((n, n))
            for k in range(n):
                h = step * max(1.0, abs(x[k]))
                xk = x.copy()
                xk[k] += h
                J[:, k] = (np.asarray(F(xk)) - f) / h
        try:
            dx = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError as exc:
            raise SolverError("singular Jacobian") from exc
        lam = 1.0
        while True:
            try:
                xn = x + lam * dx
                fn = np.asarray(F(xn), dtype=float)
                rn = np.max(np.abs(fn))
            except DomainError:
                rn = np.inf
            if rn < res or lam < 1e-3:
                break
            lam *= 0.5
        if not np.isfinite(rn):
            raise SolverError("Newton left the admissible region")
        stalled = rn > 0.5 * res
        x, f, res = xn, fn, rn
        if stalled and res <= tol:
            break
    if not res <= tol:
        raise SolverError(f"Newton did not converge (residual {res:.3e})")
    return x, res


def _phi_jac(U0, gamma):
    # Jacobian of alpha -> Phi(alpha; U0) reusing partial compositions
    def jac(a, f):
        a1, a2, a3, a4 = a
        m = phi_chain(a, U0, gamma)
        base = np.array(m[4])
        J = np.empty((4, 4))
        h = FD_STEP * max(1.0, abs(a4))
        J[:, 3] = (np.array(wave_curve(m[3], 4, a4 + h, gamma)) - base) / h
        h = FD_STEP * max(1.0, abs(a3))
        J[:, 2] = (np.array(wave_curve(contact_curve(m[2], 0.0, a3 + h), 4, a4, gamma)) - base) / h
        h = FD_STEP * max(1.0, abs(a2))
        J[:, 1] = (np.array(wave_curve(contact_curve(m[1], a2 + h, a3), 4, a4, gamma)) - base) / h
        h = FD_STEP * max(1.0, abs(a1))
        J[:, 0] = (np.array(phi((a1 + h, a2, a3, a4), U0, gamma)) - base) / h
        return J
    return jac


def linear_guess(Ul, Ur, gamma):
    Um = 0.5 * (np.asarray(Ul) + np.asarray(Ur))
    R = eigenvectors(Um, gamma)
    return np.linalg.solve(R.T, np.asarray(Ur) - np.asarray(Ul))


def fan_speeds(states, alphas, gamma):
    m0, m1, m2, m3, m4 = states
    a1, a2, a3, a4 = alphas
    if a1 < 0.0:
        s = hugoniot_speed(m0, 1, m1[3] / m0[3], gamma)
        s1 = (s, s)
    else:
        s1 = (char_speed(m0, gamma, 1), char_speed(m1, gamma, 1))
    s23 = m1[1] / m1[0]
    if a4 < 0.0:
        s = hugoniot_speed(m3, 4, m4[3] / m3[3], gamma)
        s4 = (s, s)
    else:
        s4 = (char_speed(m3, gamma, 4), char_speed(m4, gamma, 4))
    return (s1[0], s1[1], s23, s4[0], s4[1])


def solve_riemann(Ul, Ur, gamma, guess=None, tol=NEWTON_TOL):
    """Find alpha with Phi(alpha; Ul) = Ur and assemble the fan."""
    Ul = FlowState(*Ul)
    Ur = FlowState(*Ur)
    if tuple(Ul) == tuple(Ur):
        z = (0.0, 0.0, 0.0, 0.0)
        st = (Ul,) * 5
        return RiemannSolution(z, st, fan_speeds(st, z, gamma))
    ur = np.array(Ur)
    x0 = linear_guess(Ul, Ur, gamma) if guess is None else np.asarray(guess, float)
    F = lambda a: np.array(phi(a, Ul, gamma)) - ur
    a, _ = newton(F, x0, jac=_phi_jac(Ul, gamma), tol=tol)
    alphas = tuple(float(t) for t in a)
    st = phi_chain(alphas, Ul, gamma)
    return RiemannSolution(alphas, st, fan_speeds(st, alphas, gamma))


def riemann_fan_eval(sol, origin, xi, gamma):
    """Self-similar solution at slope xi = (y - y0)/(x - x0) from the origin."""
    m0, m1, m2, m3, m4 = sol.states
    s1m, s1p, s23, s4m, s4p = sol.speeds
    a1, a4 = sol.alphas[0], sol.alphas[3]
    if xi < s1m:
        return m0
    if xi < s1p:
        return isentrope_state(m0, 1, xi - char_speed(m0, gamma, 1), gamma)
    if xi < s23:
        return m1
    if xi < s4m:
        return m3
    if xi < s4p:
        return isentrope_state(m3, 4, xi - char_speed(m3, gamma, 4), gamma)
    return m4


# Free boundary ----------------------------------------------------------------

def solve_inverse_riemann(Uminus, p_plus, gamma):
    """Downstream state, strong-shock slope and boundary slope for pressure p_plus."""
    Up, s0 = shock_polar_state(Uminus, p_plus, gamma)
    return Up, s0, Up[1] / Up[0]


def boundary_pressure_wave(U1, p2, gamma):
    """1-wave delta1 with Phi^(3)(delta1, 0, 0, 0; U1) = p2.

    Rarefaction side: the isentrope; shock side: the Hugoniot density at p2.
    Both are mapped to alpha through the density parameterization.
    """
    u1, v1, p1, rho1 = U1
    if p2 == p1:
        return BoundaryRiemannSolution(0.0, FlowState(*U1))
    if not p2 > 0.0:
        raise DomainError("nonpositive boundary pressure")
    if p2 < p1:
        rho = rho1 * (p2 / p1) ** (1.0 / gamma)
    else:
        rho = rho1 * density_ratio_for_pressure(U1, p2, gamma)
    d = alpha_from_density(U1, 1, rho, gamma)
    Ub = wave_curve(U1, 1, d, gamma)
    return BoundaryRiemannSolution(d, Ub)


def boundary_reflection(U1, beta2, beta3, beta4, gamma, p_target=None):
    """Reflected 1-wave when (beta2, beta3, beta4) on top of U1 hit the wall."""
    if p_target is None:
        p_target = phi((0.0, beta2, beta3, beta4), U1, gamma)[2]
    return boundary_pressure_wave(U1, p_target, gamma)


def strong_shock_boundary(U1, p2, gamma):
    """Slope s of the 1-shock from U1 with G^(3)(s; U1) = p2."""
    return shock_polar_state(U1, p2, gamma, check=False)[1]


# Strong shock interactions --------------------------------------------------

def strong_resolve(Ul, Ur, gamma, guess=None, tol=NEWTON_TOL):
    """Solve Phi(0, d2, d3, d4; G(s; Ul)) = Ur for (s, d2, d3, d4).

    Internally the strong shock is parameterized by its density ratio.
    """
    Ul = FlowState(*Ul)
    ur = np.array(Ur)
    if guess is None:
        r0 = density_ratio_for_pressure(Ul, Ur[2], gamma)
        G0 = hugoniot_state(Ul, 1, r0, gamma)[0]
        d0 = linear_guess(G0, Ur, gamma)
        x0 = np.array([r0, d0[1], d0[2], d0[3]])
    else:
        x0 = np.asarray(guess, float)

    def F(x):
        G = hugoniot_state(Ul, 1, x[0], gamma)[0]
        return np.array(phi((0.0, x[1], x[2], x[3]), G, gamma)) - ur

    x, _ = newton(F, x0, tol=tol)
    r = float(x[0])
    d = (float(x[1]), float(x[2]), float(x[3]))
    G, s = hugoniot_state(Ul, 1, r, gamma)
    st = phi_chain((0.0,) + d, G, gamma)
    return StrongInteraction(s, d, G, (G, st[3], st[4]))


def strong_interaction_above(Ul, s, alphas234, beta1, gamma):
    """A 1-wave beta1 from above hits the strong shock (s; Ul) carrying alphas234."""
    from .curves import strong_shock_by_speed
    G = strong_shock_by_speed(s, Ul, gamma)
    a2, a3, a4 = alphas234
    Ur = wave_curve(phi((0.0, a2, a3, a4), G, gamma), 1, beta1, gamma)
    if beta1 == 0.0:
        return (s, a2, a3, a4)
    out = strong_resolve(Ul, Ur, gamma)
    return (out.s,) + out.deltas


def strong_interaction_below(Ul, alphas, s, betas234, gamma):
    """Weak waves alphas below the strong shock (s) catch up with it."""
    from .curves import strong_shock_by_speed
    Ua = phi(alphas, Ul, gamma)
    G = strong_shock_by_speed(s, Ua, gamma)
    Ur = phi((0.0,) + tuple(betas234), G, gamma)
    if all(a == 0.0 for a in alphas):
        return (s,) + tuple(betas234)
    out = strong_resolve(Ul, Ur, gamma)
    return (out.s,) + out.deltas


# Interaction coefficients ---------------------------------------------------

def coefficient_Kb4(U1, gamma, h=1e-5):
    """d delta1 / d beta4 for a 4-wave reflected at the boundary."""
    dp = boundary_reflection(U1, 0.0, 0.0, h, gamma).delta1
    dm = boundary_reflection(U1, 0.0, 0.0, -h, gamma).delta1
    return (dp - dm) / (2 * h)


def coefficients_Kb(U1, gamma, h=1e-5):
    out = []
    for k in range(3):
        b = [0.0, 0.0, 0.0]
        b[k] = h
        dp = boundary_reflection(U1, *b, gamma).delta1
        b[k] = -h
        dm = boundary_reflection(U1, *b, gamma).delta1
        out.append((dp - dm) / (2 * h))
    return tuple(out)


def coefficients_Ks(Ul, s, gamma, h=1e-5):
    """(K_s1, K_s2, K_s3, K_s4): derivatives of (s', d2, d3, d4) in beta1."""
    fp = np.array(strong_interaction_above(Ul, s, (0.0, 0.0, 0.0), h, gamma))
    fm = np.array(strong_interaction_above(Ul, s, (0.0, 0.0, 0.0), -h, gamma))
    return tuple((fp - fm) / (2 * h))


def coefficients_Khat(Ul, s, gamma, h=1e-5):
    """4x4 array: row i = d(s', d2, d3, d4)/d alpha_i for waves from below."""
    K = np.zeros((4, 4))
    for i in range(4):
        a = [0.0] * 4
        a[i] = h
        fp = np.array(strong_interaction_below(Ul, a, s, (0.0, 0.0, 0.0), gamma))
        a[i] = -h
        fm = np.array(strong_interaction_below(Ul, a, s, (0.0, 0.0, 0.0), gamma))
        K[i] = (fp - fm) / (2 * h)
    return K


def reflection_factor(Uminus, Uplus, s0, gamma, Ks4=None):
    """|K_s4| |lambda_4(U+) - s0| / |lambda_1(U+) - s0| at the background."""
    if Ks4 is None:
        Ks4 = coefficients_Ks(Uminus, s0, gamma)[3]
    lam = eigenvalues(Uplus, gamma)
    return abs(Ks4) * abs(lam[3] - s0) / abs(lam[0] - s0)


def reflection_factor_closed_form(Uminus, Uplus, s0, gamma):
    """Closed-form bound |(s0 u- N - u+ lam4 M)/(s0 u- N + u+ lam4 M)|."""
    um, up = Uminus[0], Uplus[0]
    c2 = gamma * Uplus[2] / Uplus[3]
    lam4 = eigenvalues(Uplus, gamma)[3]
    M = c2 / (gamma - 1.0) * (2 * up - um) + up * up * (up - um)
    N = -c2 / (gamma - 1.0)
    return abs((s0 * um * N - up * lam4 * M) / (s0 * um * N + up * lam4 * M))


def glimm_delta(alpha, beta):
    """Interaction amount Delta(alpha, beta) for waves alpha (left) and beta (right)."""
    d = 0.0
    for i in range(4):
        for j in range(i):
            d += abs(alpha[i]) * abs(beta[j])
    for k in range(4):
        if not (alpha[k] >= 0.0 and beta[k] >= 0.0):
            d += abs(alpha[k]) * abs(beta[k])
    return d
