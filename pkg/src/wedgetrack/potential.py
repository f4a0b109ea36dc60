"""Irrotational isentropic (potential) flow: the 2x2 system in (u, v).

The density is a function of the speed through Bernoulli's law,
rho = R(q) = ((gamma-1)/gamma (B - q^2/2))^(1/(gamma-1)), with p = rho^gamma.
States are handled in lifted form (u, v, R(q)^gamma, R(q)) so that the
tracking engine can run the potential system through the same code path as
the Euler system.  The two families are labelled 1 and 4 to line up with
the Euler families they coincide with.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .curves import CurveExitError, alpha_from_density, isentrope_state
from .gas import DomainError, FlowState, eigenvalues
from .riemann import SolverError, newton


class PotentialState(NamedTuple):
    u: float
    v: float


def rho_of_speed(q, B, gamma):
    """R(q) from Bernoulli's law with p = rho^gamma."""
    t = (gamma - 1.0) / gamma * (B - 0.5 * q * q)
    if not t > 0.0:
        raise DomainError(f"speed {q} beyond the cavitation limit sqrt(2B)")
    return t ** (1.0 / (gamma - 1.0))


def check_domain(w, B, gamma):
    """Condition on the speed: 2(gamma-1)B/(gamma+1) < q^2 < 2B."""
    q2 = w[0] * w[0] + w[1] * w[1]
    if not (2.0 * (gamma - 1.0) * B / (gamma + 1.0) < q2 < 2.0 * B):
        raise DomainError(f"|u|^2={q2} outside the potential-flow domain")


def lift(w, B, gamma):
    """(u, v) -> (u, v, R(|u|)^gamma, R(|u|))."""
    rho = rho_of_speed(math.hypot(w[0], w[1]), B, gamma)
    return FlowState(float(w[0]), float(w[1]), rho ** gamma, rho)


def bernoulli_of(w, gamma):
    """B of a lifted state (p = rho^gamma)."""
    return 0.5 * (w[0] ** 2 + w[1] ** 2) + gamma * w[3] ** (gamma - 1.0) / (gamma - 1.0)


def pf_eigen(w, B, gamma):
    """Eigenvalues (lambda_1, lambda_2) of the potential system."""
    U = lift(w, B, gamma)
    lam = eigenvalues(U, gamma)
    return lam[0], lam[3]


def pf_eigen_direct(w, B, gamma):
    """Same eigenvalues from the 2x2 characteristic polynomial (oracle)."""
    u, v = w
    rho = rho_of_speed(math.hypot(u, v), B, gamma)
    c2 = gamma * rho ** (gamma - 1.0)
    # (u^2 - c^2) lambda^2 - 2uv lambda + (v^2 - c^2) = 0
    a, b, c = u * u - c2, -2.0 * u * v, v * v - c2
    r = math.sqrt(b * b - 4 * a * c)
    return ((-b - r) / (2 * a), (-b + r) / (2 * a))


def _euler_family(j):
    return {1: 1, 2: 4, 4: 4}[j]


def pf_rarefaction(U0, j, alpha, B, gamma):
    """Lifted rarefaction branch: the Euler isentrope, re-lifted."""
    U = isentrope_state(U0, j, alpha, gamma)
    return lift(U[:2], B, gamma)


def pf_shock(U0, j, alpha, B, gamma):
    """Potential-flow shock with parameter alpha < 0; returns (state, slope).

    The density is the isentrope's density at the same alpha.  The speed
    follows from Bernoulli, and the flow angle from the jump conditions of
    the 2x2 system (mass flux and irrotationality): the tangential velocity
    is continuous and rho w_n is continuous across the front.  Eliminating
    the front direction gives
      1 - cos(phi - phi0) = (q0 - q)(rho q - rho0 q0) / ((rho + rho0) q q0),
    and the compressive branch turns the flow clockwise (phi < phi0) for
    both families.
    """
    u0, v0, p0, rho0 = U0
    rho = isentrope_state(U0, j, alpha, gamma)[3]
    q0 = math.hypot(u0, v0)
    q2 = 2.0 * (B - gamma * rho ** (gamma - 1.0) / (gamma - 1.0))
    if q2 <= 0.0:
        raise DomainError("potential shock leaves the domain")
    q = math.sqrt(q2)
    one_m_cos = (q0 - q) * (rho * q - rho0 * q0) / ((rho + rho0) * q * q0)
    if one_m_cos < 0.0:
        if one_m_cos > -1e-15:
            one_m_cos = 0.0
        else:
            raise DomainError("inadmissible potential shock")
    d = -2.0 * math.asin(math.sqrt(0.5 * one_m_cos))
    phi = math.atan2(v0, u0) + d
    u, v = q * math.cos(phi), q * math.sin(phi)
    U = FlowState(u, v, rho ** gamma, rho)
    if abs(v - v0) <= 1e-13 * q0:
        # vanishing strength: the slope tends to the characteristic one
        s = 0.5 * (eigenvalues(U0, gamma)[j - 1] + eigenvalues(U, gamma)[j - 1])
    else:
        s = -(u - u0) / (v - v0)
    return U, s


def pf_wave_curve(w, j, alpha, B, gamma):
    """Phi_{P,j}(alpha; w) for j in {1, 2} (velocity only)."""
    U0 = lift(w, B, gamma)
    jj = _euler_family(j)
    if alpha >= 0.0:
        U = pf_rarefaction(U0, jj, alpha, B, gamma)
    else:
        U = pf_shock(U0, jj, alpha, B, gamma)[0]
    return PotentialState(U[0], U[1])


def pf_rh_residual(Ul, Ur, s):
    """Jump conditions of the 2x2 system: s[rho u] - [rho v] and s[v] + [u]."""
    m = s * (Ur[3] * Ur[0] - Ul[3] * Ul[0]) - (Ur[3] * Ur[1] - Ul[3] * Ul[1])
    c = s * (Ur[1] - Ul[1]) + (Ur[0] - Ul[0])
    return max(abs(m), abs(c))


class PotentialSystem:
    """Adapter for the tracking engine (lifted states, families 1 and 4)."""
    name = "potential"
    families = (1, 4)

    def __init__(self, gamma, B):
        self.gamma = gamma
        self.B = B

    def project(self, U):
        return lift(U[:2], self.B, self.gamma)

    def rarefaction(self, U0, j, a):
        return pf_rarefaction(U0, j, a, self.B, self.gamma)

    def shock(self, U0, j, a):
        return pf_shock(U0, j, a, self.B, self.gamma)

    def contact(self, U0, a):
        raise ValueError("the potential system has no linearly degenerate family")

    def wave(self, U0, j, a):
        if a >= 0.0:
            return self.rarefaction(U0, j, a)
        return self.shock(U0, j, a)[0]

    def char_speed(self, U, j):
        lam = eigenvalues(U, self.gamma)
        return lam[j - 1]

    def riemann(self, Ul, Ur):
        a1, a4 = pf_riemann(Ul, Ur, self.B, self.gamma)
        return [(1, a1), (4, a4)]

    def boundary_wave(self, U1, p):
        rho = p ** (1.0 / self.gamma)
        d = alpha_from_density(U1, 1, rho, self.gamma)
        return d, self.wave(U1, 1, d)


def pf_riemann(Ul, Ur, B, gamma, tol=1e-12):
    """(a1, a4) with Phi_{P,4}(a4; Phi_{P,1}(a1; ul)) = ur."""
    if Ul[0] == Ur[0] and Ul[1] == Ur[1]:
        return 0.0, 0.0
    from .gas import eigenvectors
    Um = lift(0.5 * (np.array(Ul[:2]) + np.array(Ur[:2])), B, gamma)
    R = eigenvectors(Um, gamma)
    A = np.array([[R[0][0], R[3][0]], [R[0][1], R[3][1]]])
    x0 = np.linalg.solve(A, np.array(Ur[:2]) - np.array(Ul[:2]))
    ur = np.array(Ur[:2])
    sys = PotentialSystem(gamma, B)

    def F(a):
        Um = sys.wave(Ul, 1, a[0])
        return np.array(sys.wave(Um, 4, a[1])[:2]) - ur

    a, _ = newton(F, x0, tol=tol)
    return float(a[0]), float(a[1])


def pf_boundary_wave(U1, p, B, gamma):
    return PotentialSystem(gamma, B).boundary_wave(U1, p)


def pf_run(scenario, params=None):
    """Potential-flow front tracking run (mode forced to "potential")."""
    from dataclasses import replace
    from .tracking import run
    sc = replace(scenario, mode="potential")
    return run(sc, params)


def curve_coincidence_check(Ul, alphas, j, gamma):
    """Max |Phi_E - Psi| along the rarefaction branch for the given alphas."""
    from .curves import wave_curve
    B = bernoulli_of(Ul, gamma)
    dev = 0.0
    for a in alphas:
        if a < 0.0:
            raise ValueError("coincidence holds on the rarefaction branch only")
        UE = wave_curve(Ul, j, a, gamma)
        UP = pf_rarefaction(Ul, j, a, B, gamma)
        dev = max(dev, max(abs(x - y) for x, y in zip(UE, UP)))
    return dev


def shock_branch_deviation(Ul, alpha, j, gamma):
    """|Phi_E(alpha) - Psi(alpha)| on the shock branch (alpha < 0)."""
    from .curves import wave_curve
    B = bernoulli_of(Ul, gamma)
    UE = wave_curve(Ul, j, alpha, gamma)
    UP = pf_shock(Ul, j, alpha, B, gamma)[0]
    return float(np.linalg.norm(np.subtract(UE, UP)))
