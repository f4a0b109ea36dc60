"""Event-driven wave-front tracking for the free-boundary problem.

x is the time-like variable.  Fronts are straight segments in the (x, y)
plane; between events they move freely.  An event is a collision of two
adjacent fronts, a front reaching the boundary from below, or a jump of the
discretized boundary pressure at x = h dx.  The engine is written against a
small wave-system adapter so that the Euler and potential-flow runs share
every decision; see :class:`EulerSystem` and ``potential.PotentialSystem``.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace
from typing import List, NamedTuple, Optional

import numpy as np

from . import functionals as fn
from .curves import (
    contact_curve, hugoniot_state, isentrope_state, lax_check, shock_curve,
    strong_shock_by_speed, wave_curve,
)
from .gas import DomainError, FlowState, char_speed, eigenvalues, rh_residual
from .riemann import (
    SolverError, boundary_pressure_wave, solve_riemann, strong_resolve,
    strong_shock_boundary,
)

ZERO_WAVE = 1e-15
NP = 5


class TrackingError(RuntimeError):
    """Run aborted; ``events`` holds the tail of the event log."""

    def __init__(self, msg, events=None):
        super().__init__(msg)
        self.events = events or []


class AdmissionError(TrackingError):
    """Glimm functional of the discretized data above the admission threshold."""


# Wave systems -------------------------------------------------------------

class EulerSystem:
    """Full 4x4 steady Euler system (families 1, 2+3 combined, 4)."""
    name = "euler"
    families = (1, 2, 4)

    def __init__(self, gamma):
        self.gamma = gamma

    def project(self, U):
        return FlowState(*U)

    def rarefaction(self, U0, j, a):
        return isentrope_state(U0, j, a, self.gamma)

    def shock(self, U0, j, a):
        return shock_curve(U0, j, a, self.gamma)

    def contact(self, U0, a):
        return contact_curve(U0, a[0], a[1])

    def wave(self, U0, j, a):
        if j == 2:
            return self.contact(U0, a)
        return wave_curve(U0, j, a, self.gamma)

    def char_speed(self, U, j):
        return char_speed(U, self.gamma, j)

    def riemann(self, Ul, Ur):
        a = solve_riemann(Ul, Ur, self.gamma).alphas
        return [(1, a[0]), (2, (a[1], a[2])), (4, a[3])]

    def boundary_wave(self, U1, p):
        r = boundary_pressure_wave(U1, p, self.gamma)
        return r.delta1, r.boundary_state


# Fronts, events, parameters ---------------------------------------------

class WaveFront:
    """A straight front joining Ul (below) to Ur (above) from (x0, y0)."""
    __slots__ = ("id", "family", "kind", "strength", "alphas", "speed", "x0", "y0",
                 "Ul", "Ur", "order", "x_end", "lo", "hi", "mag", "rank", "shock")

    def __init__(self, id, family, kind, strength, speed, x0, y0, Ul, Ur, order, alphas=None):
        self.id = id
        self.family = family
        self.kind = kind
        self.strength = strength
        self.alphas = alphas
        self.speed = speed
        self.x0 = x0
        self.y0 = y0
        self.Ul = Ul
        self.Ur = Ur
        self.order = order
        self.x_end = None
        self.lo = None
        self.hi = None
        # cached for the functionals
        self.mag = fn.front_size(self)
        self.rank = fn.family_rank(self)
        self.shock = kind == "shock"

    def y_at(self, x):
        return self.y0 + self.speed * (x - self.x0)

    @property
    def size(self):
        return self.mag

    def __repr__(self):
        return (f"WaveFront(id={self.id}, fam={self.family}, {self.kind}, "
                f"a={self.strength:.3g}, s={self.speed:.6g}, x0={self.x0:.6g}, y0={self.y0:.6g})")


class Event(NamedTuple):
    x: float
    kind: str           # collision | strong | boundary | pressure
    solver: str         # accurate | simplified | pass | none
    ids_in: tuple
    ids_out: tuple


@dataclass
class TrackingParams:
    mu: float = 1e-3
    dx: float = 0.05
    delta: Optional[float] = None       # default sqrt(mu) * ref_strength
    nu: Optional[float] = None          # default: non-physical strength rule (pilot run)
    nu_strong: float = 0.0
    lambda_hat: Optional[float] = None
    x_max: float = 10.0
    radius: float = 0.3
    max_events: int = 500_000
    record_functionals: bool = True
    eps_admit: Optional[float] = None
    ref_strength: float = 1.0
    weights: Optional[fn.FunctionalWeights] = None

    @property
    def dy(self):
        return 2.0 * self.lambda_hat * self.dx


@dataclass
class Inputs:
    """Discretized data: pressure steps on [(h-1)dx, h dx), incoming cells."""
    mode: str
    gamma: float
    dx: float
    dy: float
    pb: np.ndarray              # pb[h-1] is the sample on [(h-1)dx, h dx)
    pb_bar: float
    l0: int                     # first incoming cell index
    cells: list                 # cells[k] covers [(l0+k) dy, (l0+k+1) dy)
    U_far: FlowState            # state below all cells (background)
    Um: FlowState
    Up: FlowState
    s0: Optional[float]
    B: Optional[float] = None   # Bernoulli constant (potential/compare)

    def pb_at(self, x):
        h = int(math.floor(x / self.dx + 1e-9))
        if h < len(self.pb):
            return float(self.pb[h])
        return self.pb_bar

    def omega(self):
        """Jumps omega_h = |p^{h+1} - p^h| located at x = h dx, h >= 1."""
        p = np.append(self.pb, self.pb_bar)
        return np.abs(np.diff(p))

    def U_at(self, y):
        l = int(math.floor(y / self.dy))
        k = l - self.l0
        if 0 <= k < len(self.cells):
            return self.cells[k]
        return self.U_far


@dataclass
class CrossSection:
    x: float
    fronts: list
    ys: np.ndarray
    states: list
    b: float
    U_b: FlowState
    chi: Optional[float]
    s: Optional[float]


@dataclass
class Trajectory:
    inputs: Inputs
    params: TrackingParams
    system: str
    strong: bool
    fronts: list
    events: list
    boundary: list              # (x0, b0, slope, U_b, p_sample)
    series: dict
    meta: dict = field(default_factory=dict)

    @property
    def x_max(self):
        return self.params.x_max

    def b_at(self, x):
        seg = _segment_at(self.boundary, x)
        return seg[1] + seg[2] * (x - seg[0])

    def Ub_at(self, x):
        return _segment_at(self.boundary, x)[3]

    def strong_fronts(self):
        return [f for f in self.fronts if f.kind == "strong"]

    def chi_at(self, x):
        for f in self.strong_fronts():
            if f.x0 <= x and (f.x_end is None or x < f.x_end):
                return f.y_at(x), f.speed
        if self.strong:
            f = self.strong_fronts()[-1]
            return f.y_at(x), f.speed
        return None, None

    def b_curve(self):
        return np.array([(s[0], s[1], s[2]) for s in self.boundary])

    def chi_curve(self):
        return np.array([(f.x0, f.y0, f.speed) for f in self.strong_fronts()])

    def section(self, x, side="right"):
        return sample_solution(self, x, side)


def _segment_at(segs, x):
    lo, hi = 0, len(segs) - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if segs[mid][0] <= x:
            lo = mid
        else:
            hi = mid - 1
    return segs[lo]


# Input discretization -----------------------------------------------------

def _lift_from_velocity(u, v, B, gamma):
    q2 = u * u + v * v
    rho = ((gamma - 1.0) / gamma * (B - 0.5 * q2)) ** (1.0 / (gamma - 1.0))
    return FlowState(u, v, rho ** gamma, rho)


def default_lambda_hat(Um, Up, gamma):
    lam = max(eigenvalues(Um, gamma)[3], eigenvalues(Up, gamma)[3])
    return lam + 1.0


def discretize_inputs(scenario, mu, dx, lambda_hat=None):
    """Step functions p^{mu,dx}_b on {h dx} and U^{mu,dx}_inf on {l dy}.

    Midpoint sampling.  The L1 errors are measured by quadrature and stored in
    ``inputs.l1_errors`` (callers may check them against mu).
    """
    g = scenario.gamma
    Um, Up, s0, pb_bar = scenario.background_states()
    if lambda_hat is None:
        lambda_hat = default_lambda_hat(Um, Up, g)
    dy = 2.0 * lambda_hat * dx
    pert = scenario.boundary_pressure
    tv = scenario.data_total_variation()
    if not math.isfinite(tv):
        raise ValueError("input data must have finite total variation")
    a, b = pert.interval()
    H = int(math.ceil(b / dx)) if b > 0 else 0
    pb = np.array([pb_bar + pert((h + 0.5) * dx) for h in range(H)], float)
    B = None
    dim = scenario.incoming_dim()
    if scenario.mode == "euler":
        mk = lambda d: FlowState(*(np.array(Um) + d))
    else:
        B = scenario.bernoulli_constant()
        mk = lambda d: _lift_from_velocity(Um[0] + d[0], Um[1] + d[1], B, g)
    ia, ib = scenario.incoming.interval()
    ib = min(ib, 0.0)
    if ib > ia:
        l0 = int(math.floor(ia / dy))
        l1 = int(math.ceil(ib / dy))
        cells = [mk(np.atleast_1d(scenario.incoming((l + 0.5) * dy, dim)))
                 for l in range(l0, l1)]
    else:
        l0, cells = 0, []
    inp = Inputs(scenario.mode, g, dx, dy, pb, pb_bar, l0, cells, FlowState(*Um), Um, Up, s0, B)
    inp.l1_errors = input_l1_errors(scenario, inp)
    return inp


def input_l1_errors(scenario, inp, n=64):
    """Quadrature L1 distance between the data and its step approximation."""
    pert = scenario.boundary_pressure
    e_p = 0.0
    for h in range(len(inp.pb)):
        t = (h + (np.arange(n) + 0.5) / n) * inp.dx
        e_p += sum(abs(inp.pb_bar + pert(tt) - inp.pb[h]) for tt in t) * inp.dx / n
    e_u = 0.0
    dim = scenario.incoming_dim()
    for k, U in enumerate(inp.cells):
        l = inp.l0 + k
        t = (l + (np.arange(n) + 0.5) / n) * inp.dy
        for tt in t:
            d = np.atleast_1d(scenario.incoming(tt, dim))
            e_u += np.linalg.norm(np.array(inp.Um[:dim]) + d - np.array(U[:dim])) * inp.dy / n
    return e_p, e_u


# Engine -----------------------------------------------------------------------

class _Engine:
    def __init__(self, inputs, params, system, strong, weights):
        self.inp = inputs
        self.p = params
        self.sys = system
        self.strong = strong
        self.w = weights
        self.g = inputs.gamma
        self.fronts: List[WaveFront] = []
        self.events: List[Event] = []
        self.heap = []
        self.seq = 0
        self.bver = 0
        self.top = None
        self.bottom = None
        self.x = 0.0
        self.series = {k: [] for k in ("x", "L", "Q", "F", "NP", "dev_lo", "dev_hi", "n_fronts")}
        self.sup_Lm = []
        self.omega = inputs.omega()
        self.omega_tail = np.append(np.cumsum(self.omega[::-1])[::-1], 0.0)
        self.refs = (inputs.Um, inputs.Up)
        self.np_created = []    # (order, strength, rho) of each new NP front
        self.n_simplified = 0

    # bookkeeping -----------------------------------------------------------
    def _new(self, family, kind, strength, speed, y, Ul, Ur, order, alphas=None):
        f = WaveFront(len(self.fronts), family, kind, strength, speed, self.x, y, Ul, Ur, order, alphas)
        if kind != "nonphysical" and not speed < self.p.lambda_hat:
            raise TrackingError(f"front speed {speed} exceeds lambda_hat", self.events[-20:])
        self.fronts.append(f)
        return f

    def _check_state(self, U):
        d = min(np.linalg.norm(np.subtract(U, r)) for r in self.refs)
        if not d < self.p.radius:
            raise TrackingError(f"state {tuple(U)} left the neighborhood (distance {d:.3g})",
                                self.events[-20:])

    def _push(self, x, kind, a=None, b=None, ver=0):
        self.seq += 1
        heapq.heappush(self.heap, (x, self.seq, kind, a, b, ver))

    def _schedule_pair(self, lo, hi):
        if lo is None or hi is None:
            return
        ds = lo.speed - hi.speed
        if ds <= 0.0:
            return
        gap = hi.y_at(self.x) - lo.y_at(self.x)
        t = self.x + max(gap, 0.0) / ds
        if t <= self.p.x_max:
            self._push(t, "c", lo, hi)

    def _schedule_boundary(self, f):
        if f is None:
            return
        bx, by, sl = self.bseg[0], self.bseg[1], self.bseg[2]
        ds = f.speed - sl
        if ds <= 0.0:
            return
        gap = (by + sl * (self.x - bx)) - f.y_at(self.x)
        t = self.x + max(gap, 0.0) / ds
        if t <= self.p.x_max:
            self._push(t, "b", f, None, self.bver)

    def b_now(self):
        bx, by, sl = self.bseg[0], self.bseg[1], self.bseg[2]
        return by + sl * (self.x - bx)

    def _set_boundary(self, Ub, p_sample):
        self._check_state(Ub)
        y = self.b_now() if self.boundary else 0.0
        seg = (self.x, y, Ub[1] / Ub[0], FlowState(*Ub), p_sample)
        if self.boundary and self.boundary[-1][0] == self.x:
            self.boundary[-1] = seg
        else:
            self.boundary.append(seg)
        self.bseg = seg
        self.Ub = seg[3]
        self.bver += 1

    def _replace(self, lower, upper, removed, new):
        """Unlink ``removed`` (consecutive) and link ``new`` between lower and upper."""
        for f in removed:
            f.x_end = self.x
            f.lo = f.hi = None
        chain = [lower] + new + [upper]
        for a, b in zip(chain[:-1], chain[1:]):
            if a is not None:
                a.hi = b
            if b is not None:
                b.lo = a
        if lower is None:
            self.bottom = new[0] if new else upper
        if upper is None:
            self.top = new[-1] if new else lower
        seq = [f for f in chain if f is not None]
        for a, b in zip(seq[:-1], seq[1:]):
            if a in new or b in new or (a is lower and b is upper):
                self._schedule_pair(a, b)
        if upper is None:
            self._schedule_boundary(self.top)

    # wave emission ---------------------------------------------------------
    def _emit(self, y, Ul, waves, target=None):
        """Fronts for [(family, alpha, order), ...] starting from Ul at (x, y)."""
        out = []
        U = Ul
        sys = self.sys
        for fam, a, order in waves:
            if fam == 2:
                if abs(a[0]) + abs(a[1]) < ZERO_WAVE:
                    continue
                Ur = sys.contact(U, a)
                out.append(self._new(2, "contact", abs(a[0]) + abs(a[1]), U[1] / U[0], y, U, Ur, order, tuple(a)))
                U = Ur
            elif fam == NP:
                Ur = a
                out.append(self._new(NP, "nonphysical", float(np.linalg.norm(np.subtract(Ur, U))),
                                     self.p.lambda_hat, y, U, FlowState(*Ur), order))
                U = FlowState(*Ur)
            elif a < 0.0:
                if -a < ZERO_WAVE:
                    continue
                Ur, s = sys.shock(U, fam, a)
                out.append(self._new(fam, "shock", a, s, y, U, Ur, order))
                U = Ur
            else:
                if a < ZERO_WAVE:
                    continue
                n = int(math.floor(a / self.p.delta)) + 1
                U0 = U
                for i in range(1, n + 1):
                    Ui = sys.rarefaction(U0, fam, a if i == n else a * i / n)
                    out.append(self._new(fam, "rarefaction", a / n, sys.char_speed(U, fam), y, U, Ui, order))
                    U = Ui
        if target is not None:
            target = FlowState(*target)
            if out:
                out[-1].Ur = target
            U = target
        for f in out:
            self._check_state(f.Ur)
        return out, U

    # events ---------------------------------------------------------------
    def _collide(self, lo, hi):
        y = 0.5 * (lo.y_at(self.x) + hi.y_at(self.x))
        if lo.kind == "strong" or hi.kind == "strong":
            return self._strong_event(lo, hi, y)
        Ul, Ur = lo.Ul, hi.Ur
        m1, m2 = lo.order, hi.order
        fl, fh = fn.family_rank(lo), fn.family_rank(hi)
        if lo.family == NP and hi.family != NP:
            # the physical front passes below the NP front
            out, _ = self._emit(y, Ul, [self._fa(hi) + (m2,), (NP, Ur, m1)])
            self.n_simplified += 1
            return self._finish("collision", "simplified", lo, hi, out)
        phys = lo.family != NP and hi.family != NP
        if phys and lo.size * hi.size <= self.p.nu:
            self.n_simplified += 1
            if fl == fh:
                a = lo.strength + hi.strength
                out, U1 = self._emit(y, Ul, [(fl, a, min(m1, m2))])
            else:
                out, U1 = self._emit(y, Ul, [self._fa(hi) + (m2,), self._fa(lo) + (m1,)])
            if np.linalg.norm(np.subtract(U1, Ur)) > 0.0:
                out2, _ = self._emit(y, U1, [(NP, Ur, max(m1, m2) + 1)])
                self.np_created.append((max(m1, m2) + 1, out2[0].strength if out2 else 0.0))
                out += out2
            return self._finish("collision", "simplified", lo, hi, out)
        waves = self.sys.riemann(Ul, Ur)
        ow = []
        for fam, a in waves:
            if fl != fh:
                o = m1 if fam == fl else m2 if fam == fh else max(m1, m2) + 1
            else:
                o = min(m1, m2) if fam == fl else max(m1, m2) + 1
            ow.append((fam, a, o))
        out, _ = self._emit(y, Ul, ow, target=Ur)
        return self._finish("collision", "accurate", lo, hi, out)

    def _fa(self, f):
        if f.kind == "contact":
            return (2, f.alphas)
        return (f.family, f.strength)

    def _finish(self, kind, solver, lo, hi, out):
        self._replace(lo.lo, hi.hi, [lo, hi], out)
        return Event(self.x, kind, solver, (lo.id, hi.id), tuple(f.id for f in out))

    def _strong_front(self, Ul, s, y, G=None):
        if G is None:
            G = strong_shock_by_speed(s, Ul, self.g)
        f = self._new(1, "strong", 0.0, s, y, FlowState(*Ul), G, 1)
        self._check_strong(f)
        return f

    def _check_strong(self, f):
        if not (f.Ur[3] > f.Ul[3] and rh_residual(f.Ul, f.Ur, f.speed, self.g) < 1e-9):
            raise TrackingError(f"strong shock lost admissibility at x={self.x}", self.events[-20:])
        self._check_state(f.Ul)
        self._check_state(f.Ur)

    def _strong_event(self, lo, hi, y):
        nus = self.p.nu_strong
        if hi.kind == "strong":
            S, w = hi, lo
            Ul, Ur = w.Ul, S.Ur
            m = w.order
            if w.family == NP or w.size <= nus:
                # simplified: strong shock keeps its slope, an NP front carries the rest
                sf = self._strong_front(Ul, S.speed, y)
                o = m if w.family == NP else max(m, 1) + 1
                out2, _ = self._emit(y, sf.Ur, [(NP, Ur, o)])
                self.np_created.append((o, out2[0].strength if out2 else 0.0))
                self.n_simplified += 1
                return self._finish("strong", "simplified", lo, hi, [sf] + out2)
            fw = fn.family_rank(w)
            o2 = m if fw == 2 else max(m, 1) + 1
            o4 = m if fw == 4 else max(m, 1) + 1
        else:
            S, w = lo, hi
            Ul, Ur = S.Ul, w.Ur
            m = w.order
            if w.size <= nus:
                # NP front hitting the strong shock: shock unchanged, NP front above it
                out2, _ = self._emit(y, S.Ur, [(NP, Ur, max(m, 1) + 1)])
                self.np_created.append((max(m, 1) + 1, out2[0].strength if out2 else 0.0))
                self.n_simplified += 1
                self._replace(S, w.hi, [w], out2)
                return Event(self.x, "strong", "simplified", (w.id,), tuple(f.id for f in out2))
            o2 = o4 = max(m, 1) + 1
        try:
            res = strong_resolve(Ul, Ur, self.g)
        except (SolverError, DomainError) as exc:
            raise TrackingError(f"strong-shock solve failed at x={self.x}: {exc}", self.events[-20:]) from exc
        sf = self._strong_front(Ul, res.s, y, res.behind)
        d2, d3, d4 = res.deltas
        out, _ = self._emit(y, sf.Ur, [(2, (d2, d3), o2), (4, d4, o4)], target=Ur)
        return self._finish("strong", "accurate", lo, hi, [sf] + out)

    def _boundary_hit(self, T):
        Ul = T.Ul
        if T.kind == "strong":
            raise TrackingError("strong shock reached the boundary (detachment)", self.events[-20:])
        if T.family == NP or T.size <= self.p.nu:
            self._replace(T.lo, None, [T], [])
            self._set_boundary(Ul, self.inp.pb_at(self.x))
            self._schedule_boundary(self.top)
            return Event(self.x, "boundary", "pass", (T.id,), ())
        p = self.inp.pb_at(self.x)
        d, Ub = self.sys.boundary_wave(Ul, p)
        out, _ = self._emit(self.b_now(), Ul, [(1, d, max(T.order, 1) + 1)], target=Ub)
        self._set_boundary(Ub, p)
        self._replace(T.lo, None, [T], out)
        return Event(self.x, "boundary", "accurate", (T.id,), tuple(f.id for f in out))

    def _pressure_step(self, h):
        p = float(self.inp.pb[h]) if h < len(self.inp.pb) else self.inp.pb_bar
        U1 = self.Ub
        d, Ub = self.sys.boundary_wave(U1, p)
        out, _ = self._emit(self.b_now(), U1, [(1, d, 1)], target=Ub)
        self._set_boundary(Ub, p)
        self._replace(self.top, None, [], out)
        return Event(self.x, "pressure", "accurate", (), tuple(f.id for f in out))

    # initial data ---------------------------------------------------------
    def start(self):
        inp = self.inp
        self.boundary = []
        self.bseg = (0.0, 0.0, 0.0, None, None)
        # incoming cells from the bottom up
        fronts = []
        U = inp.U_far
        for k, Uc in enumerate(inp.cells):
            y = (inp.l0 + k) * inp.dy
            if tuple(Uc) != tuple(U):
                out, _ = self._emit(y, U, [(fam, a, 1) for fam, a in self.sys.riemann(U, Uc)], target=Uc)
                fronts += out
            U = Uc
        y_top = (inp.l0 + len(inp.cells)) * inp.dy
        if inp.cells and y_top < 0.0 and tuple(U) != tuple(inp.U_far):
            out, _ = self._emit(y_top, U, [(fam, a, 1) for fam, a in self.sys.riemann(U, inp.U_far)],
                                target=inp.U_far)
            fronts += out
            U = inp.U_far
        U_top = U
        p1 = inp.pb_at(0.0)
        if self.strong:
            s1 = strong_shock_boundary(U_top, p1, self.g)
            sf = self._strong_front(U_top, s1, 0.0)
            fronts.append(sf)
            Ub = sf.Ur
        else:
            d, Ub = self.sys.boundary_wave(U_top, p1)
            out, _ = self._emit(0.0, U_top, [(1, d, 1)], target=Ub)
            fronts += out
        self._set_boundary(Ub, p1)
        self._replace(None, None, [], fronts)
        for h in range(1, len(inp.pb) + 1):
            if h * inp.dx <= self.p.x_max and self.omega[h - 1] != 0.0:
                self._push(h * inp.dx, "p", h)

    def live(self):
        out = []
        f = self.bottom
        while f is not None:
            out.append(f)
            f = f.hi
        return out

    def record(self):
        x = self.x
        if not self.p.record_functionals:
            return
        h = int(math.floor(x / self.inp.dx + 1e-12))
        om = float(self.omega_tail[h]) if h < len(self.omega_tail) else 0.0
        # pending jump between the boundary state and the sampled pressure
        om += abs(self.Ub[2] - self.inp.pb_at(x))
        rep = fn.glimm_functional(self.live(), self.w, om, self.refs if self.strong else None, x)
        s = self.series
        for k, v in (("x", x), ("L", rep.L), ("Q", rep.Q), ("F", rep.F), ("NP", rep.NP_total),
                     ("dev_lo", rep.U_below_dev), ("dev_hi", rep.U_above_dev)):
            s[k].append(v)
        s["n_fronts"].append(len(self.fronts))
        Lm = rep.L_m
        if len(Lm) > len(self.sup_Lm):
            self.sup_Lm += [0.0] * (len(Lm) - len(self.sup_Lm))
        for i, v in enumerate(Lm):
            if v > self.sup_Lm[i]:
                self.sup_Lm[i] = v

    def run(self):
        self.start()
        self.record()
        if self.p.eps_admit is not None and self.series["F"] and self.series["F"][0] > self.p.eps_admit:
            raise AdmissionError(
                f"Glimm functional F(0)={self.series['F'][0]:.4g} exceeds eps={self.p.eps_admit}")
        n = 0
        while self.heap:
            x, _, kind, a, b, ver = heapq.heappop(self.heap)
            if x > self.p.x_max:
                break
            if kind == "c":
                if a.x_end is not None or b.x_end is not None or a.hi is not b:
                    continue
                self.x = x
                ev = self._collide(a, b)
            elif kind == "b":
                if a.x_end is not None or a.hi is not None or ver != self.bver:
                    continue
                self.x = x
                ev = self._boundary_hit(a)
            else:
                self.x = x
                ev = self._pressure_step(a)
            self.events.append(ev)
            self.record()
            n += 1
            if n > self.p.max_events:
                raise TrackingError(f"event budget {self.p.max_events} exhausted at x={x}", self.events[-20:])
        self.x = self.p.x_max


def _resolve_params(params, inputs, system_name):
    p = replace(params)
    if p.lambda_hat is None:
        p.lambda_hat = default_lambda_hat(inputs.Um, inputs.Up, inputs.gamma)
    if p.delta is None:
        p.delta = math.sqrt(p.mu) * p.ref_strength
    return p


def _weights_for(inputs, params, strong):
    if params.weights is not None:
        return params.weights
    if strong:
        return fn.default_weights(inputs.gamma, tuple(inputs.Um), inputs.s0)
    return fn.default_weights(inputs.gamma, tuple(inputs.Um), None)


def run_inputs(inputs, params, system=None, strong=None):
    """Run the engine on already-discretized inputs."""
    if system is None:
        system = EulerSystem(inputs.gamma)
    if strong is None:
        strong = inputs.mode == "euler"
    p = _resolve_params(params, inputs, system.name)
    meta = {}
    if p.nu is None:
        p.nu, meta["nu_rule"] = nu_from_rule(inputs, p, system, strong)
    eng = _Engine(inputs, p, system, strong, _weights_for(inputs, p, strong))
    eng.run()
    meta.update(n_simplified=eng.n_simplified, sup_Lm=list(eng.sup_Lm), weights=eng.w,
                np_created=eng.np_created)
    return Trajectory(inputs, p, system.name, strong, eng.fronts, eng.events, eng.boundary,
                      {k: np.array(v) for k, v in eng.series.items()}, meta)


class _RestartEngine(_Engine):
    """Engine started from a given cross-section instead of incoming cells.

    The section's breakpoints become Riemann problems of ``system``; the
    boundary starts at (0, sec.b) with state sec.U_b.  The pressure is the
    constant ``inputs.pb_bar`` unless ``inputs.pb`` holds steps.
    """

    def __init__(self, sec, inputs, params, system, weights):
        super().__init__(inputs, params, system, False, weights)
        self.sec = sec

    def start(self):
        sec = self.sec
        fronts = []
        for y, Ul, Ur in zip(sec.ys, sec.states[:-1], sec.states[1:]):
            if tuple(Ul) == tuple(Ur):
                continue
            waves = [(fam, a, 1) for fam, a in self.sys.riemann(Ul, Ur)]
            out, _ = self._emit(float(y), Ul, waves, target=Ur)
            fronts += out
        self.boundary = [(0.0, sec.b, sec.U_b[1] / sec.U_b[0], FlowState(*sec.U_b), self.inp.pb_at(0.0))]
        self.bseg = self.boundary[0]
        self.Ub = self.bseg[3]
        self.bver += 1
        if abs(self.Ub[2] - self.inp.pb_at(0.0)) > 1e-12:
            d, Ub = self.sys.boundary_wave(self.Ub, self.inp.pb_at(0.0))
            out, _ = self._emit(sec.b, self.Ub, [(1, d, 1)], target=Ub)
            fronts += out
            self._set_boundary(Ub, self.inp.pb_at(0.0))
        self._replace(None, None, [], fronts)
        for h in range(1, len(self.inp.pb) + 1):
            if h * self.inp.dx <= self.p.x_max and self.omega[h - 1] != 0.0:
                self._push(h * self.inp.dx, "p", h)


def run_from_section(sec, inputs, params, system=None):
    """Track from the cross-section ``sec`` (local abscissa 0) to params.x_max.

    No strong shock is tracked.  ``inputs`` supplies gamma, the pressure
    (pb steps on the local abscissa, pb_bar beyond) and the reference states.
    """
    if system is None:
        system = EulerSystem(inputs.gamma)
    p = _resolve_params(params, inputs, system.name)
    if p.nu is None:
        p.nu = 0.0
    eng = _RestartEngine(sec, inputs, p, system, _weights_for(inputs, p, False))
    eng.run()
    inp = replace(inputs, U_far=FlowState(*sec.states[0]))
    return Trajectory(inp, p, system.name, False, eng.fronts, eng.events, eng.boundary,
                      {k: np.array(v) for k, v in eng.series.items()},
                      {"weights": eng.w, "n_simplified": eng.n_simplified})


def run(scenario, params=None, system=None):
    """Discretize ``scenario`` and track it to ``params.x_max``.

    mode "euler" runs the Euler system with the strong shock; "compare" runs
    the Euler system on lifted isentropic data without a strong shock;
    "potential" runs the potential-flow engine.
    """
    if params is None:
        params = params_from_scenario(scenario)
    inputs = discretize_inputs(scenario, params.mu, params.dx, params.lambda_hat)
    if system is None:
        if scenario.mode == "potential":
            from .potential import PotentialSystem
            system = PotentialSystem(scenario.gamma, inputs.B)
        else:
            system = EulerSystem(scenario.gamma)
    return run_inputs(inputs, params, system, strong=scenario.mode == "euler")


def params_from_scenario(scenario):
    c = scenario.solver
    return TrackingParams(mu=c.mu, dx=c.dx, delta=c.delta, nu=c.nu, nu_strong=c.nu_strong,
                          lambda_hat=c.lambda_hat, x_max=c.x_max, radius=c.radius,
                          max_events=c.max_events, record_functionals=c.record_functionals,
                          eps_admit=c.eps_admit)


def nu_from_rule(inputs, params, system, strong, pilot_factor=0.1):
    """Threshold nu from the non-physical strength bound.

    Each simplified interaction creates a non-physical front of strength at
    most M2 nu, and the fronts of order <= m number at most P_m.  A pilot run
    with nu = pilot_factor * mu measures M2 (largest NP strength / nu), the
    decay ratio eta of sup_x L_m and the count P_m of NP fronts of order <= m,
    where m is the first order with KK F(0) eta^m < mu / 2.  The result is
    nu = min(nu_pilot, mu / (2 M2 P_m)).
    """
    p = replace(params, nu=pilot_factor * params.mu)
    eng = _Engine(inputs, p, system, strong, _weights_for(inputs, p, strong))
    eng.run()
    info = {"nu_pilot": p.nu}
    created = eng.np_created
    if not created:
        info.update(M2=0.0, m=0, P_m=0, eta=None)
        return p.nu, info
    M2 = max(s for _, s in created) / p.nu
    eta = fit_decay(eng.sup_Lm)
    F0 = eng.series["F"][0] if eng.series["F"] else 0.0
    mmax = max(o for o, _ in created)
    m = mmax
    if eta is not None and 0.0 < eta < 1.0 and F0 > 0.0:
        for k in range(1, mmax + 1):
            if eng.w.KK * F0 * eta ** k < 0.5 * params.mu:
                m = k
                break
    P_m = sum(1 for o, _ in created if o <= m + 1)
    nu = min(p.nu, params.mu / (2.0 * M2 * max(P_m, 1)))
    info.update(M2=M2, m=m, P_m=P_m, eta=eta)
    return nu, info


def fit_decay(values):
    """Least-squares ratio eta of a geometric sequence (ignores zeros)."""
    v = np.asarray(values, float)
    idx = np.nonzero(v > 0)[0]
    if len(idx) < 2:
        return None
    slope = np.polyfit(idx, np.log(v[idx]), 1)[0]
    return float(math.exp(slope))


# Sampling -----------------------------------------------------------------

def probe_x(traj, x, side="right"):
    """An abscissa strictly inside the event-free interval next to x.

    Fronts never cross inside that interval, so sorting by position there
    gives the bottom-to-top order even when two fronts meet at x.
    """
    xs = traj.meta.get("_event_xs")
    if xs is None:
        xs = np.array([e.x for e in traj.events])
        traj.meta["_event_xs"] = xs
    if side == "right":
        k = int(np.searchsorted(xs, x, side="right"))
        nxt = xs[k] if k < len(xs) else traj.x_max
        return 0.5 * (x + nxt) if nxt > x else None
    k = int(np.searchsorted(xs, x, side="left")) - 1
    prv = xs[k] if k >= 0 else 0.0
    return 0.5 * (prv + x)


def build_section(traj, x, alive, side, seg):
    xp = probe_x(traj, x, side)
    if xp is not None:
        alive.sort(key=lambda f: (f.y_at(xp), f.id))
    else:
        sg = 1.0 if side == "right" else -1.0
        alive.sort(key=lambda f: (f.y_at(x), sg * f.speed, f.id))
    ys = np.maximum.accumulate(np.array([f.y_at(x) for f in alive])) if alive else np.zeros(0)
    states = [alive[0].Ul if alive else traj.inputs.U_far]
    states += [f.Ur for f in alive]
    b = seg[1] + seg[2] * (x - seg[0])
    chi = s = None
    for f in alive:
        if f.kind == "strong":
            chi, s = f.y_at(x), f.speed
    return CrossSection(x, alive, ys, states, b, seg[3], chi, s)


def sample_solution(traj, x, side="right"):
    """Cross-section at x: ordered fronts, breakpoints and states.

    ``side="right"`` uses fronts alive on [x, x+), ``"left"`` on (x-, x].
    """
    if x == 0.0:
        side = "right"
    if side == "right":
        alive = [f for f in traj.fronts if f.x0 <= x and (f.x_end is None or f.x_end > x)]
        seg = _segment_at(traj.boundary, x)
    else:
        alive = [f for f in traj.fronts if f.x0 < x and (f.x_end is None or f.x_end >= x)]
        segs = [s for s in traj.boundary if s[0] < x] or traj.boundary[:1]
        seg = segs[-1]
    return build_section(traj, x, alive, side, seg)


def state_at(section, y):
    """State of a cross-section at height y (boundary state above b)."""
    if y >= section.b:
        return section.U_b
    k = int(np.searchsorted(section.ys, y, side="right"))
    return section.states[k]
