"""Scenario description: background flow, boundary pressure, incoming data."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .curves import background_inflow_angle, critical_pressure, shock_polar_state
from .gas import FlowState, eigenvalues


class ConditionError(ValueError):
    """A scenario violates one of the admissibility conditions."""


@dataclass
class Perturbation:
    """Piecewise-constant (``breaks``/``values``) or callable perturbation.

    Piecewise: value ``values[k]`` on ``[breaks[k], breaks[k+1])`` and zero
    outside ``[breaks[0], breaks[-1])``.  Values are scalars for the boundary
    pressure and vectors for the incoming state.
    """
    breaks: Optional[Sequence[float]] = None
    values: Optional[Sequence] = None
    func: Optional[Callable] = None
    support: Optional[tuple] = None

    def __post_init__(self):
        if self.breaks is not None:
            b = np.asarray(self.breaks, float)
            if len(b) != len(self.values) + 1 or np.any(np.diff(b) <= 0):
                raise ValueError("breaks must be increasing with len(values) + 1 entries")
        if self.func is not None and self.support is None:
            raise ValueError("callable perturbations need a finite support interval")

    @property
    def is_zero(self):
        if self.func is not None:
            return False
        if self.breaks is None:
            return True
        return all(np.all(np.asarray(v) == 0) for v in self.values)

    def interval(self):
        if self.func is not None:
            return tuple(self.support)
        if self.breaks is None:
            return (0.0, 0.0)
        return (float(self.breaks[0]), float(self.breaks[-1]))

    def __call__(self, t, dim=1):
        if self.func is not None:
            lo, hi = self.support
            if lo <= t < hi:
                return np.asarray(self.func(t), float)
            return np.zeros(dim) if dim > 1 else 0.0
        if self.breaks is None:
            return np.zeros(dim) if dim > 1 else 0.0
        b = self.breaks
        if t < b[0] or t >= b[-1]:
            return np.zeros(dim) if dim > 1 else 0.0
        k = int(np.searchsorted(b, t, side="right")) - 1
        v = self.values[k]
        return np.asarray(v, float) if dim > 1 else float(v)

    def total_variation(self, dim=1, n=4000):
        if self.func is None:
            if self.breaks is None:
                return 0.0
            vals = [np.zeros(dim)] + [np.atleast_1d(np.asarray(v, float)) for v in self.values] + [np.zeros(dim)]
            return float(sum(np.linalg.norm(vals[k + 1] - vals[k]) for k in range(len(vals) - 1)))
        lo, hi = self.support
        t = np.linspace(lo, hi, n)
        vals = np.array([np.atleast_1d(self(tt, dim)) for tt in t[:-1]] + [np.zeros(dim)])
        vals = np.vstack([np.zeros(dim), vals])
        return float(np.sum(np.linalg.norm(np.diff(vals, axis=0), axis=1)))


@dataclass
class Background:
    """Incoming background: Mach number, static pressure and density.

    In Euler mode the flow angle follows from the boundary pressure so that
    the attached shock turns the flow parallel to the flat wall.  In the
    potential/compare modes the flow is parallel to the wall, the state is
    isentropic with p = rho^gamma and pb_bar is ignored.
    """
    mach: float = 2.0
    p: float = 1.0
    rho: float = 1.4
    pb_bar: Optional[float] = 1.5


@dataclass
class SolverConfig:
    mu: float = 1e-3
    dx: float = 0.05
    delta: Optional[float] = None
    nu: Optional[float] = None
    nu_strong: float = 0.0
    lambda_hat: Optional[float] = None
    x_max: float = 10.0
    radius: float = 0.3
    max_events: int = 500_000
    record_functionals: bool = True
    eps_admit: Optional[float] = None


@dataclass
class Scenario:
    gamma: float = 1.4
    mode: str = "euler"          # euler | potential | compare
    background: Background = field(default_factory=Background)
    boundary_pressure: Perturbation = field(default_factory=Perturbation)
    incoming: Perturbation = field(default_factory=Perturbation)
    solver: SolverConfig = field(default_factory=SolverConfig)
    name: str = "scenario"

    def __post_init__(self):
        if self.mode not in ("euler", "potential", "compare"):
            raise ValueError(f"unknown mode {self.mode}")
        if not self.gamma > 1.0:
            raise ConditionError("Condition 1.1: adiabatic exponent must exceed 1")

    @property
    def strong_shock(self):
        return self.mode == "euler"

    # background states ------------------------------------------------------
    def isentropic_background(self):
        """Wall-parallel isentropic background (p = rho^gamma)."""
        g = self.gamma
        rho = self.background.rho
        p = rho ** g
        c = math.sqrt(g * p / rho)
        q = self.background.mach * c
        return FlowState(q, 0.0, p, rho)

    def bernoulli_constant(self):
        U = self.isentropic_background()
        g = self.gamma
        return 0.5 * U[0] ** 2 + g * U[3] ** (g - 1.0) / (g - 1.0)

    def background_states(self):
        """(U_minus, U_plus, s0, pb_bar) of the unperturbed problem."""
        g = self.gamma
        bg = self.background
        if bg.mach <= 1.0:
            raise ConditionError("Condition 1.1: incoming background must be supersonic (M > 1)")
        if self.mode != "euler":
            U = self.isentropic_background()
            if not U[0] ** 2 > g * U[2] / U[3]:
                raise ConditionError("Condition P1.1(a): background speed outside the supersonic range")
            return U, U, None, U[2]
        if bg.pb_bar is None:
            raise ConditionError("Condition 1.2(a): Euler mode needs a boundary pressure pb_bar")
        ratio = bg.pb_bar / bg.p
        if not ratio > 1.0:
            raise ConditionError("Condition 1.2(a): need p_inf < pb_bar for an attached strong shock")
        th = background_inflow_angle(bg.mach, ratio, g)
        c = math.sqrt(g * bg.p / bg.rho)
        q = bg.mach * c
        Um = FlowState(q * math.cos(th), q * math.sin(th), bg.p, bg.rho)
        p_sonic = critical_pressure(Um, g)
        if not bg.pb_bar < p_sonic:
            raise ConditionError(
                f"Condition 1.2(a): pb_bar={bg.pb_bar} must lie below p_sonic={p_sonic:.6g}")
        Up, s0 = shock_polar_state(Um, bg.pb_bar, g)
        eigenvalues(Up, g)
        return Um, Up, s0, bg.pb_bar

    def incoming_dim(self):
        return 4 if self.mode == "euler" else 2

    def data_total_variation(self):
        return (self.boundary_pressure.total_variation(1)
                + self.incoming.total_variation(self.incoming_dim()))


# Scenario families -------------------------------------------------------------

def random_small_data(seed, amp=1e-3, ncell=10, nstep=8, dx=0.05, mode="euler", dp=0.0,
                      cell_width=3, step_width=4):
    """Random incoming cells below the strong shock and random wall-pressure steps.

    Cells are ``cell_width`` grid cells tall and sit just below y = 0; the
    pressure steps are ``step_width`` grid steps long and start at x = step_width dx.
    ``dp`` shifts every pressure value (used to build perturbed pairs).
    """
    from .tracking import default_lambda_hat
    rng = np.random.default_rng(seed)
    sc = Scenario(mode=mode, name=f"random-{seed}")
    if mode != "euler":
        sc = Scenario(mode=mode, background=Background(rho=1.0, pb_bar=None), name=f"random-{seed}")
    Um, Up, s0, pb = sc.background_states()
    dy = 2.0 * default_lambda_hat(Um, Up, sc.gamma) * dx
    dim = sc.incoming_dim()
    yb = [(-ncell * cell_width + i * cell_width) * dy for i in range(ncell + 1)]
    vals = [rng.uniform(-amp, amp, dim) for _ in range(ncell)]
    xb = [i * step_width * dx for i in range(1, nstep + 2)]
    pv = [float(rng.uniform(-amp, amp)) + dp for _ in range(nstep)]
    return Scenario(sc.gamma, mode, sc.background, Perturbation(xb, pv), Perturbation(yb, vals),
                    name=sc.name)


def pressure_ramp(eps, n=1, length=4.0, mach=2.0, sign=1.0, mode="compare"):
    """Isentropic background with the wall pressure stepping by sign*eps/n, n times.

    sign > 0 raises the pressure (compressions reflected off the wall), sign < 0
    lowers it (rarefactions only as long as x_max <= length).
    """
    steps = np.linspace(0.0, length, n + 1)
    vals = [sign * eps * (k + 1) / n for k in range(n)]
    breaks = list(steps[:-1]) + [length]
    # Euler mode keeps the strong shock, so it needs the default wall pressure
    bg = Background(mach=mach) if mode == "euler" else Background(mach=mach, rho=1.0, pb_bar=None)
    return Scenario(mode=mode, background=bg,
                    boundary_pressure=Perturbation(breaks, vals),
                    name=f"ramp-{'up' if sign > 0 else 'down'}-{eps:g}")
