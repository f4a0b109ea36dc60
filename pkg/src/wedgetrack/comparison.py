"""Euler versus potential flow: Y-distances, the cubic law and defect rates.

The Euler runs use mode "compare": the same lifted isentropic data as the
potential run, tracked by the Euler system without a strong shock.  The
solution semigroup is realized by restarting the Euler engine from a
cross-section at a small mu.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import stats

from .gas import DomainError
from .lyapunov import y_distance, y_distance_sections
from .riemann import SolverError
from .tracking import (CrossSection, Inputs, TrackingError, TrackingParams, run,
                       run_from_section, sample_solution)


def compare_runs(euler_traj, pf_traj, x, parts=False):
    """Y-distance between the Euler and the potential solution at x."""
    if x > euler_traj.x_max or x > pf_traj.x_max:
        raise ValueError(f"x={x} beyond the horizon of one of the runs "
                         f"({euler_traj.x_max}, {pf_traj.x_max})")
    return y_distance(euler_traj, pf_traj, x, parts)


def run_pair(scenario, params):
    """(Euler compare-mode run, potential run) on the same scenario."""
    te = run(replace(scenario, mode="compare"), params)
    tp = run(replace(scenario, mode="potential"), params)
    return te, tp


# Cubic scaling ------------------------------------------------------------------

class ScalingRow(NamedTuple):
    eps: float
    x: float
    mu: float
    Y: float
    flagged: bool
    n_events: int


@dataclass
class ScalingReport:
    rows: list
    x_fit: float
    slope: float
    slope_ci: tuple
    intercept: float
    x_ratios: dict              # eps -> [Y(x_{k+1}) x_k / (Y(x_k) x_{k+1}), ...]
    excluded: list = field(default_factory=list)

    def slope_ok(self, target=3.0, tol=0.4):
        return abs(self.slope - target) <= tol

    def linear_ok(self, tol=0.25):
        return all(abs(r - 1.0) <= tol for v in self.x_ratios.values() for r in v)


def default_mu(eps):
    return eps ** 3 / 10.0


def cubic_scaling_study(scenario_family: Callable, eps_list, x_list, dx=0.05, mu_of=default_mu,
                        nu=1e-14, floor=1e-12, x_fit=None, params=None):
    """Y(x)/x against eps on a log-log scale.

    ``scenario_family(eps)`` returns a Scenario.  A level is flagged (and left
    out of the fit) when mu > eps^3/10 or when Y(x_fit) falls below ``floor``.
    """
    eps_list = sorted(eps_list, reverse=True)
    x_list = sorted(x_list)
    if len(eps_list) < 3:
        raise ValueError("the study needs at least three eps levels")
    x_fit = x_list[-1] if x_fit is None else x_fit
    rows, excluded = [], []
    ratios = {}
    fit_e, fit_y = [], []
    for eps in eps_list:
        mu = mu_of(eps)
        prm = params(eps) if params is not None else TrackingParams(
            x_max=max(x_list), mu=mu, dx=dx, nu=nu)
        te, tp = run_pair(scenario_family(eps), prm)
        ys = [compare_runs(te, tp, x) for x in x_list]
        bad_mu = prm.mu > eps ** 3 / 10.0 * (1 + 1e-12)
        for x, y in zip(x_list, ys):
            rows.append(ScalingRow(eps, x, prm.mu, y, bad_mu or y < floor,
                                   len(te.events) + len(tp.events)))
        yfit = compare_runs(te, tp, x_fit) if x_fit not in x_list else ys[x_list.index(x_fit)]
        if bad_mu or yfit < floor:
            excluded.append(eps)
        else:
            fit_e.append(eps)
            fit_y.append(yfit / x_fit)
        ratios[eps] = [(ys[k + 1] * x_list[k]) / (ys[k] * x_list[k + 1])
                       for k in range(len(x_list) - 1) if ys[k] > 0]
    if len(fit_e) >= 2:
        lr = stats.linregress(np.log(fit_e), np.log(fit_y))
        dof = len(fit_e) - 2
        t = stats.t.ppf(0.975, dof) if dof > 0 else math.inf
        ci = (lr.slope - t * lr.stderr, lr.slope + t * lr.stderr)
        slope, icpt = float(lr.slope), float(lr.intercept)
    else:
        slope, icpt, ci = math.nan, math.nan, (math.nan, math.nan)
    return ScalingReport(rows, x_fit, slope, ci, icpt, ratios, excluded)


# Semigroup defect ---------------------------------------------------------------

def restart_inputs(traj_inputs, p_const):
    """Inputs for an Euler restart with constant boundary pressure."""
    inp = traj_inputs
    return Inputs("compare", inp.gamma, inp.dx, inp.dy, np.zeros(0), p_const, 0, [],
                  inp.U_far, inp.Um, inp.Up, None, inp.B)


def advance_free(sec, h):
    """Move every front of a section by h along its slope (no interactions)."""
    ys = np.array([f.y_at(sec.x + h) for f in sec.fronts])
    if len(ys) > 1 and np.any(np.diff(ys) < 0):
        raise ValueError("fronts cross within h; advance_free needs a smaller h")
    b = sec.b + h * sec.U_b[1] / sec.U_b[0]
    return CrossSection(sec.x + h, sec.fronts, ys, sec.states, b, sec.U_b, sec.chi, sec.s)


def euler_step(sec, inputs, h, mu, p_const=None, nu=0.0):
    """S_h applied to a section: restart the Euler engine and advance h."""
    p = sec.U_b[2] if p_const is None else p_const
    inp = restart_inputs(inputs, p)
    prm = TrackingParams(mu=mu, dx=inputs.dx, x_max=h, nu=nu, lambda_hat=inputs.dy / (2 * inputs.dx),
                         record_functionals=False)
    t = run_from_section(sec, inp, prm)
    return sample_solution(t, h), t


def section_defect(sec, sec_next, inputs, h, mu, p_const=None):
    """Y(S_h W(x), W(x+h)) / h for one section (pressure tails coincide)."""
    out, _ = euler_step(sec, inputs, h, mu, p_const)
    y = y_distance_sections(out, sec_next, inputs, inputs, 0.0)
    return (y.db + y.l1) / h


class DefectSample(NamedTuple):
    x: float
    rate: float
    tv_minus: float         # total strength of the compressive fronts at x
    flagged: bool
    reason: str


def tv_minus(sec):
    return float(sum(abs(f.strength) for f in sec.fronts if f.kind == "shock"))


def semigroup_defect(pf_traj, h, xs=None, mu=None, n=8):
    """Per-x defect rate Y(S_h W_P(x), W_P(x+h)) / h of a potential run.

    Samples that straddle a boundary-pressure step are flagged and skipped.
    """
    inp = pf_traj.inputs
    if mu is None:
        mu = pf_traj.params.mu
    if xs is None:
        xs = np.linspace(0.0, pf_traj.x_max - h, n + 2)[1:-1]
    out = []
    for x in xs:
        if x + h > pf_traj.x_max:
            out.append(DefectSample(x, math.nan, math.nan, True, "beyond horizon"))
            continue
        k0 = int(math.floor(x / inp.dx + 1e-9))
        k1 = int(math.floor((x + h) / inp.dx - 1e-9))
        if any(inp.pb_at((k + 0.5) * inp.dx) != inp.pb_at(x) for k in range(k0 + 1, k1 + 1)):
            out.append(DefectSample(x, math.nan, math.nan, True, "pressure step inside (x, x+h)"))
            continue
        sec = sample_solution(pf_traj, x)
        nxt = sample_solution(pf_traj, x + h)
        p = inp.pb_at(x)
        try:
            r = section_defect(sec, nxt, inp, h, mu, p)
        except (TrackingError, SolverError, DomainError) as exc:
            out.append(DefectSample(x, math.nan, tv_minus(sec), True, f"restart failed: {exc}"))
            continue
        out.append(DefectSample(x, r, tv_minus(sec), False, ""))
    return out


def fit_power(a, r):
    """Slope of log r against log a."""
    lr = stats.linregress(np.log(a), np.log(r))
    return float(lr.slope), float(lr.stderr)


# Defect micro-tests -------------------------------------------------------------

def single_wave_section(inputs, kind, a, fam=4, y0=-1.0):
    """Cross-section at x = 0 holding one potential-flow front of size a > 0.

    ``kind`` is "shock", "rarefaction" or "nonphysical" (a velocity jump of
    size a moving at the non-physical speed).
    """
    from .potential import PotentialSystem, lift
    from .tracking import NP, WaveFront
    ps = PotentialSystem(inputs.gamma, inputs.B)
    U0 = inputs.Um
    if kind == "shock":
        Ur, s = ps.shock(U0, fam, -a)
        f = WaveFront(0, fam, "shock", -a, s, 0.0, y0, U0, Ur, 1)
    elif kind == "rarefaction":
        Ur = ps.rarefaction(U0, fam, a)
        f = WaveFront(0, fam, "rarefaction", a, ps.char_speed(U0, fam), 0.0, y0, U0, Ur, 1)
    elif kind == "nonphysical":
        Ur = lift((U0[0] + a, U0[1]), inputs.B, inputs.gamma)
        f = WaveFront(0, NP, "nonphysical", a, inputs.dy / (2 * inputs.dx), 0.0, y0, U0, Ur, 1)
    else:
        raise ValueError(f"unknown front kind {kind}")
    return CrossSection(0.0, [f], np.array([y0]), [U0, Ur], 0.0, U0, None, None)


def defect_rates(inputs, kind, alphas, h=0.2, mu_of=None):
    """Defect rate Y(S_h W, W(h))/h of a single free front against its size.

    The Euler restart splits rarefactions into fans of size about sqrt(mu);
    the default mu is (a/64)^2 for rarefactions and 1e-10 otherwise.
    """
    if mu_of is None:
        mu_of = (lambda a: (a / 64.0) ** 2) if kind == "rarefaction" else (lambda a: 1e-10)
    out = []
    for a in alphas:
        sec = single_wave_section(inputs, kind, a)
        out.append(section_defect(sec, advance_free(sec, h), inputs, h, mu_of(a)))
    return np.array(out)
