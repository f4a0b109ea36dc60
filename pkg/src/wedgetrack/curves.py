"""Elementary wave curves through a state.

Families 1 and 4 are parameterized by ``alpha`` such that
``d Phi_j / d alpha = r_j`` at ``alpha = 0``.  On the rarefaction side the
curve is the integral curve of ``r_j``; since ``r_j . grad lambda_j = 1`` the
parameter is exactly the increment of ``lambda_j``.  Entropy and Bernoulli
are constant along it, so it is the Prandtl-Meyer simple-wave curve and is
evaluated in closed form up to a scalar Newton solve for the Mach number.

The shock side is the Hugoniot locus, parameterized internally by the
density ratio.  To fix ``alpha`` there we give the shock state the density
that the (analytically continued) isentrope carries at the same ``alpha``.
Shock and isentrope have second-order contact, so this makes ``Phi_j``
twice differentiable at ``alpha = 0``.

Orientation: a front separates a state below (smaller y, ``U0``) from a state
above.  For family 1 the density grows across a shock going upward, for
family 4 it drops; in both cases it grows along the flow direction.
"""
from __future__ import annotations

import math
from typing import NamedTuple

from scipy.optimize import brentq

from .gas import DomainError, FlowState, NotSupersonicError, char_speed, eigenvalues


class CurveExitError(DomainError):
    """The curve left the supersonic region before reaching the parameter."""


class WaveParam(NamedTuple):
    family: int
    alpha: float


class StrongShock(NamedTuple):
    s: float
    below: FlowState
    above: FlowState


# Prandtl-Meyer helpers --------------------------------------------------------

def pm_nu(M, gamma):
    """Prandtl-Meyer angle."""
    k = math.sqrt((gamma + 1.0) / (gamma - 1.0))
    t = math.sqrt(M * M - 1.0)
    return k * math.atan(t / k) - math.atan(t)


def _pm_g(M, gamma):
    # nu - mu: characteristic angle relative to the flow angle, up to sign
    t = math.sqrt(M * M - 1.0)
    k = math.sqrt((gamma + 1.0) / (gamma - 1.0))
    return k * math.atan(t / k) - math.atan(t) - math.atan2(1.0, t)


def _pm_gprime(M, gamma):
    t = math.sqrt(M * M - 1.0)
    return t / (M * (1.0 + 0.5 * (gamma - 1.0) * M * M)) + 1.0 / (M * t)


def _mach_for_dg(M0, dg, gamma):
    """Solve g(M) - g(M0) = dg by safeguarded Newton."""
    if dg == 0.0:
        return M0
    g0 = _pm_g(M0, gamma)
    M = M0
    fold = math.inf
    for _ in range(60):
        f = _pm_g(M, gamma) - g0 - dg
        if abs(f) >= fold and fold < 1e-13:
            return M
        fold = abs(f)
        step = f / _pm_gprime(M, gamma)
        Mn = M - step
        while Mn <= 1.0:
            step *= 0.5
            Mn = M - step
            if abs(step) < 1e-300:
                raise CurveExitError("wave curve reached the sonic line")
        if abs(Mn - M) <= 4e-16 * Mn:
            return Mn
        M = Mn
    raise CurveExitError(f"Prandtl-Meyer solve did not converge (dg={dg})")


def _dphi_from_alpha(lam0, alpha):
    # atan(lam0 + alpha) - atan(lam0) without cancellation
    return math.atan(alpha / (1.0 + lam0 * (lam0 + alpha)))


def _alpha_from_dphi(lam0, d):
    t = math.tan(d)
    return t * (1.0 + lam0 * lam0) / (1.0 - lam0 * t)


def _sign(j):
    if j == 1:
        return 1.0
    if j == 4:
        return -1.0
    raise ValueError(f"family must be 1 or 4, got {j}")


def _isentrope_from_mach(U0, j, M, gamma):
    u0, v0, p0, rho0 = U0
    c02 = gamma * p0 / rho0
    q02 = u0 * u0 + v0 * v0
    B = 0.5 * q02 + c02 / (gamma - 1.0)
    M0 = math.sqrt(q02 / c02)
    c2 = B / (0.5 * M * M + 1.0 / (gamma - 1.0))
    rho = rho0 * (c2 / c02) ** (1.0 / (gamma - 1.0))
    p = p0 * (rho / rho0) ** gamma
    q = M * math.sqrt(c2)
    th = math.atan2(v0, u0) + _sign(j) * (pm_nu(M, gamma) - pm_nu(M0, gamma))
    return FlowState(q * math.cos(th), q * math.sin(th), p, rho)


def isentrope_state(U0, j, alpha, gamma):
    """Integral curve of r_j through U0 at parameter alpha (either sign)."""
    if alpha == 0.0:
        return FlowState(*U0)
    u0, v0, p0, rho0 = U0
    lam0 = char_speed(U0, gamma, j)
    d = _dphi_from_alpha(lam0, alpha)
    M0 = math.sqrt((u0 * u0 + v0 * v0) * rho0 / (gamma * p0))
    M = _mach_for_dg(M0, _sign(j) * d, gamma)
    U = _isentrope_from_mach(U0, j, M, gamma)
    if not U[0] * U[0] > gamma * U[2] / U[3]:
        raise CurveExitError(f"family-{j} curve leaves u > c at alpha={alpha}")
    return U


def isentrope_density(U0, j, alpha, gamma):
    return isentrope_state(U0, j, alpha, gamma)[3]


def alpha_from_density(U0, j, rho, gamma):
    """Parameter at which the j-isentrope through U0 has density rho."""
    u0, v0, p0, rho0 = U0
    if rho == rho0:
        return 0.0
    c02 = gamma * p0 / rho0
    q02 = u0 * u0 + v0 * v0
    B = 0.5 * q02 + c02 / (gamma - 1.0)
    c2 = c02 * (rho / rho0) ** (gamma - 1.0)
    q2 = 2.0 * (B - c2 / (gamma - 1.0))
    if q2 <= c2:
        raise CurveExitError("density outside the supersonic part of the isentrope")
    M = math.sqrt(q2 / c2)
    M0 = math.sqrt(q02 / c02)
    lam0 = char_speed(U0, gamma, j)
    d = _sign(j) * (_pm_g(M, gamma) - _pm_g(M0, gamma))
    return _alpha_from_dphi(lam0, d)


def rarefaction_curve(U0, j, alpha, gamma):
    """R_j(alpha)(U0) for alpha >= 0."""
    if alpha < 0.0:
        raise ValueError("rarefaction branch needs alpha >= 0")
    return isentrope_state(U0, j, alpha, gamma)


# Hugoniot locus ---------------------------------------------------------------

def hugoniot_state(U0, j, r, gamma):
    """State on the j-Hugoniot locus of U0 with density rho0 * r, and its speed."""
    u0, v0, p0, rho0 = U0
    if r == 1.0:
        return FlowState(*U0), char_speed(U0, gamma, j)
    b0 = 0.5 * (gamma + 1.0) - 0.5 * (gamma - 1.0) * r
    if b0 <= 0.0 or r <= 0.0:
        raise DomainError(f"density ratio {r} outside the Hugoniot range")
    c02 = gamma * p0 / rho0
    cb2 = c02 * r / b0
    den = u0 * u0 - cb2
    disc = u0 * u0 + v0 * v0 - cb2
    if den <= 0.0 or disc < 0.0:
        raise NotSupersonicError(f"density ratio {r} gives a non-supersonic shock speed")
    sg = -1.0 if j == 1 else 1.0
    s = (u0 * v0 + sg * math.sqrt(cb2 * disc)) / den
    drho = rho0 * (r - 1.0)
    dp = c02 / b0 * drho
    dv = dp / (rho0 * (s * u0 - v0))
    du = -s * dv
    return FlowState(u0 + du, v0 + dv, p0 + dp, rho0 + drho), s


def hugoniot_speed(U0, j, r, gamma):
    u0, v0, p0, rho0 = U0
    b0 = 0.5 * (gamma + 1.0) - 0.5 * (gamma - 1.0) * r
    c02 = gamma * p0 / rho0
    cb2 = c02 * r / b0
    sg = -1.0 if j == 1 else 1.0
    return (u0 * v0 + sg * math.sqrt(cb2 * (u0 * u0 + v0 * v0 - cb2))) / (u0 * u0 - cb2)


def shock_curve(U0, j, alpha, gamma):
    """S_j(alpha)(U0) for alpha < 0; returns (state, speed)."""
    if alpha > 0.0:
        raise ValueError("shock branch needs alpha <= 0")
    if alpha == 0.0:
        return FlowState(*U0), char_speed(U0, gamma, j)
    rho = isentrope_density(U0, j, alpha, gamma)
    return hugoniot_state(U0, j, rho / U0[3], gamma)


def shock_alpha(U0, j, rho, gamma):
    """Inverse of the shock branch parameterization (density -> alpha)."""
    return alpha_from_density(U0, j, rho, gamma)


# Linearly degenerate families -----------------------------------------------

def contact_curve(U0, alpha2, alpha3):
    """Phi_3(alpha3; Phi_2(alpha2; U0)): scale (u, v) by e^alpha2, rho by e^alpha3."""
    u0, v0, p0, rho0 = U0
    e2 = math.exp(alpha2)
    return FlowState(u0 * e2, v0 * e2, p0, rho0 * math.exp(alpha3))


def wave_curve(U0, j, alpha, gamma):
    """Phi_j(alpha; U0) for a single family."""
    if j == 1 or j == 4:
        if alpha >= 0.0:
            return isentrope_state(U0, j, alpha, gamma)
        return shock_curve(U0, j, alpha, gamma)[0]
    if j == 2:
        return contact_curve(U0, alpha, 0.0)
    if j == 3:
        return contact_curve(U0, 0.0, alpha)
    raise ValueError(f"unknown family {j}")


def wave_speed(Ul, Ur, j, alpha, gamma):
    """Propagation slope of a single front of family j joining Ul to Ur."""
    if j == 2 or j == 3:
        return Ul[1] / Ul[0]
    if alpha < 0.0:
        return hugoniot_speed(Ul, j, Ur[3] / Ul[3], gamma)
    return char_speed(Ul, gamma, j)


def phi_chain(alphas, U0, gamma):
    """Intermediate states U_m0..U_m4 of the composite curve."""
    a1, a2, a3, a4 = alphas
    m1 = wave_curve(U0, 1, a1, gamma)
    m2 = contact_curve(m1, a2, 0.0)
    m3 = contact_curve(m2, 0.0, a3)
    m4 = wave_curve(m3, 4, a4, gamma)
    return (FlowState(*U0), m1, m2, m3, m4)


def phi(alphas, U0, gamma):
    """Phi(a1, a2, a3, a4; U0) = Phi_4(Phi_3(Phi_2(Phi_1(U0))))."""
    return phi_chain(alphas, U0, gamma)[4]


def phi_component(alphas, U0, gamma, i):
    """Component Phi^(i), i in 1..4 (3 is the pressure)."""
    return phi(alphas, U0, gamma)[i - 1]


# Strong 1-shock ---------------------------------------------------------------

def _r_max(U0, gamma):
    # density ratio where the shock-speed formula stops being real
    u0, v0, p0, rho0 = U0
    c02 = gamma * p0 / rho0
    return 0.5 * (gamma + 1.0) * u0 * u0 / (c02 + 0.5 * (gamma - 1.0) * u0 * u0)


def density_ratio_for_pressure(U0, p, gamma):
    """Hugoniot density ratio reached at pressure p (either family)."""
    p0 = U0[2]
    dp = p - p0
    gp = gamma * p0
    return (gp + 0.5 * (gamma + 1.0) * dp) / (gp + 0.5 * (gamma - 1.0) * dp)


def strong_shock_state(U0, r, gamma):
    return hugoniot_state(U0, 1, r, gamma)


def strong_shock_ratio(s, U0, gamma):
    """Density ratio of the 1-shock from U0 whose speed is s."""
    rhi = _r_max(U0, gamma) * (1.0 - 1e-12)
    lam1 = char_speed(U0, gamma, 1)
    if s == lam1:
        return 1.0
    f = lambda r: hugoniot_speed(U0, 1, r, gamma) - s
    flo, fhi = lam1 - s, f(rhi)
    if flo * fhi > 0.0:
        raise DomainError(f"no admissible 1-shock with speed {s}")
    return brentq(f, 1.0, rhi, xtol=1e-15, rtol=8.9e-16, maxiter=200)


def strong_shock_by_speed(s, U0, gamma):
    """G(s; U0): state behind the 1-shock of slope s."""
    r = strong_shock_ratio(s, U0, gamma)
    return strong_shock_state(U0, r, gamma)[0]


def shock_polar_state(Uminus, p, gamma, check=True):
    """Downstream 1-shock state with pressure p, and the shock slope."""
    if check:
        p_sonic = critical_pressure(Uminus, gamma)
        if not (Uminus[2] < p < p_sonic):
            raise DomainError(
                f"pressure {p} outside the polar range ({Uminus[2]}, {p_sonic})")
    r = density_ratio_for_pressure(Uminus, p, gamma)
    return hugoniot_state(Uminus, 1, r, gamma)


def critical_pressure(Uminus, gamma):
    """Pressure at which the downstream state on the 1-shock polar is sonic."""
    def f(p):
        r = density_ratio_for_pressure(Uminus, p, gamma)
        U = hugoniot_state(Uminus, 1, r, gamma)[0]
        return U[0] * U[0] + U[1] * U[1] - gamma * U[2] / U[3]
    p0 = Uminus[2]
    # upper end where the speed formula is still real
    rhi = _r_max(Uminus, gamma) * (1.0 - 1e-12)
    gp = gamma * p0
    phi_ = gp * (rhi - 1.0) / (0.5 * (gamma + 1.0) - 0.5 * (gamma - 1.0) * rhi)
    hi = p0 + phi_
    if f(hi) > 0.0:
        return hi
    lo = p0 * (1.0 + 1e-12)
    return brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)


def background_inflow_angle(M, ratio, gamma):
    """Incoming flow angle that the polar turns to zero at p_b / p_inf = ratio."""
    k = (gamma - 1.0) / (gamma + 1.0)
    num = ratio - 1.0
    den = gamma * M * M - ratio + 1.0
    root = ((1.0 + k) * (M * M - 1.0) - (ratio - 1.0)) / (ratio + k)
    if root < 0.0:
        raise DomainError("pressure ratio beyond the shock polar")
    return math.atan(num / den * math.sqrt(root))


def lax_check(Ul, Ur, j, s, gamma, tol=0.0):
    """Lax inequalities for a j-shock joining Ul (below) to Ur (above)."""
    laml = eigenvalues(Ul, gamma)
    lamr = eigenvalues(Ur, gamma)
    ok = lamr[j - 1] - tol < s < laml[j - 1] + tol
    if j == 1:
        ok = ok and s < lamr[1]
    else:
        ok = ok and s > laml[1]
    return ok


def density_increases_downstream(Ul, Ur, j):
    """Entropy condition: density grows along the flow across a j-shock."""
    if j == 1:
        return Ur[3] > Ul[3]
    return Ul[3] > Ur[3]
