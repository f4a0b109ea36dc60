"""Thermodynamics and eigenstructure of the steady 2-D Euler system.

The streamwise coordinate x plays the role of time, so the system reads
``W(U)_x + H(U)_y = 0`` with ``U = (u, v, p, rho)``.  All functions take the
adiabatic exponent as a plain float; :class:`GasParams` only validates it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class DomainError(ValueError):
    """State outside the domain where a formula is defined."""


class NotSupersonicError(DomainError):
    """Streamwise velocity is not supersonic (u <= c)."""


class FlowState(NamedTuple):
    u: float
    v: float
    p: float
    rho: float


@dataclass(frozen=True)
class GasParams:
    gamma: float = 1.4

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"adiabatic exponent must exceed 1, got {self.gamma}")


def _check(U):
    if not (U[2] > 0.0 and U[3] > 0.0):
        raise DomainError(f"nonpositive pressure or density in {tuple(U)}")


def sound_speed(U, gamma):
    _check(U)
    return math.sqrt(gamma * U[2] / U[3])


def speed(U):
    return math.hypot(U[0], U[1])


def mach(U, gamma):
    return speed(U) / sound_speed(U, gamma)


def is_supersonic(U, gamma):
    """True if the flow is supersonic in the x direction (u > c)."""
    return U[0] > sound_speed(U, gamma)


def bernoulli(U, gamma):
    """B = |u|^2/2 + gamma p / ((gamma - 1) rho)."""
    _check(U)
    return 0.5 * (U[0] * U[0] + U[1] * U[1]) + gamma * U[2] / ((gamma - 1.0) * U[3])


def entropy(U, gamma):
    """Monotone entropy surrogate p / rho^gamma."""
    _check(U)
    return U[2] / U[3] ** gamma


def eigenvalues(U, gamma):
    """Characteristic slopes (lambda_1, lambda_2, lambda_3, lambda_4)."""
    u, v, p, rho = U
    c2 = gamma * p / rho
    if not (p > 0.0 and rho > 0.0):
        raise DomainError(f"nonpositive pressure or density in {tuple(U)}")
    if not u * u > c2 or u <= 0.0:
        raise NotSupersonicError(f"u={u} is not supersonic (c={math.sqrt(c2)})")
    root = math.sqrt(c2 * (u * u + v * v - c2))
    den = u * u - c2
    lam23 = v / u
    return ((u * v - root) / den, lam23, lam23, (u * v + root) / den)


def char_speed(U, gamma, j):
    """Single eigenvalue lambda_j, j in 1..4."""
    lam = eigenvalues(U, gamma)
    return lam[j - 1]


def kappa(U, gamma, j, lam=None):
    """Normalization coefficient of r_j for the genuinely nonlinear families."""
    u, v, p, rho = U
    c2 = gamma * p / rho
    if lam is None:
        lam = char_speed(U, gamma, j)
    return (2.0 / (gamma + 1.0)) * ((u * u - c2) * lam - u * v) / (
        (1.0 + lam * lam) * (lam * u - v))


def eigenvectors(U, gamma):
    """Right eigenvectors r_1..r_4 as rows of a (4, 4) array.

    r_1, r_4 are scaled so that r_j . grad(lambda_j) = 1.
    """
    u, v, p, rho = U
    c2 = gamma * p / rho
    lam = eigenvalues(U, gamma)
    R = np.zeros((4, 4))
    for k, j in ((0, 1), (3, 4)):
        lj = lam[k]
        kj = kappa(U, gamma, j, lj)
        w = rho * (lj * u - v)
        R[k] = kj * np.array([-lj, 1.0, w, w / c2])
    R[1] = (u, v, 0.0, 0.0)
    R[2] = (0.0, 0.0, 0.0, rho)
    return R


def flux_W(U, gamma):
    u, v, p, rho = U
    h = gamma * p / ((gamma - 1.0) * rho)
    E = h + 0.5 * (u * u + v * v)
    return np.array([rho * u, rho * u * u + p, rho * u * v, rho * u * E])


def flux_H(U, gamma):
    u, v, p, rho = U
    h = gamma * p / ((gamma - 1.0) * rho)
    E = h + 0.5 * (u * u + v * v)
    return np.array([rho * v, rho * u * v, rho * v * v + p, rho * v * E])


def rh_residual(Ul, Ur, s, gamma):
    """Max-norm of s [W] - [H] across a discontinuity of slope s."""
    dW = flux_W(Ur, gamma) - flux_W(Ul, gamma)
    dH = flux_H(Ur, gamma) - flux_H(Ul, gamma)
    return float(np.max(np.abs(s * dW - dH)))


def flux_jacobians(U, gamma, rel=1e-5):
    """Central-difference Jacobians dW/dU and dH/dU."""
    U = np.asarray(U, dtype=float)
    JW = np.zeros((4, 4))
    JH = np.zeros((4, 4))
    for k in range(4):
        h = rel * max(abs(U[k]), 1.0)
        e = np.zeros(4)
        e[k] = h
        JW[:, k] = (flux_W(U + e, gamma) - flux_W(U - e, gamma)) / (2 * h)
        JH[:, k] = (flux_H(U + e, gamma) - flux_H(U - e, gamma)) / (2 * h)
    return JW, JH


def state_distance(U1, U2):
    """Max-norm distance of two states."""
    return max(abs(a - b) for a, b in zip(U1, U2))


def state_norm1(U1, U2):
    return sum(abs(a - b) for a, b in zip(U1, U2))
