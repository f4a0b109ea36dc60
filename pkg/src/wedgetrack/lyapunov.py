"""Two-run comparison: extended solutions, the Hugoniot h-decomposition,
the weighted Lyapunov functional and the Y-metric distance.

Both solutions are extended above their boundaries by the boundary state so
that they live on a common half line (-inf, b_max].  Between two runs the
scalar fields h_i(y) solve H(h; U1(y)) = U2(y) with
H(h; U) = S_4(h4)(Phi_3(h3; Phi_2(h2; S_1(h1)(U)))), S_j the j-Hugoniot curves
(parameterized by the density of the j-isentrope, as on the shock branch).
"""
from __future__ import annotations

import heapq
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from . import functionals as fn
from .curves import (contact_curve, density_ratio_for_pressure, hugoniot_state,
                     isentrope_density)
from .gas import DomainError, FlowState, eigenvalues
from .riemann import SolverError, linear_guess, newton
from .tracking import build_section

NP = fn.NP
H_TOL = 1e-12


# Incremental cross-sections ---------------------------------------------------

class SectionSweep:
    """Cross-sections of one trajectory at non-decreasing (x, side).

    Equivalent to ``sample_solution`` but replays the alive set
    incrementally; calls must come in order with "left" before "right" at a
    common x.
    """

    def __init__(self, traj):
        self.traj = traj
        self.by_start = sorted(traj.fronts, key=lambda f: (f.x0, f.id))
        self.k = 0
        self.alive = {}
        self.ends = []
        self.pos = (-math.inf, 1)
        self.seg_x = np.array([s[0] for s in traj.boundary])

    def at(self, x, side="right"):
        if x == 0.0:
            side = "right"
        key = (x, 0 if side == "left" else 1)
        if key < self.pos:
            raise ValueError("SectionSweep.at must be called with non-decreasing (x, side)")
        self.pos = key
        right = side == "right"
        fs = self.by_start
        while self.k < len(fs) and (fs[self.k].x0 < x or (right and fs[self.k].x0 == x)):
            f = fs[self.k]
            self.k += 1
            self.alive[f.id] = f
            if f.x_end is not None:
                heapq.heappush(self.ends, (f.x_end, f.id))
        while self.ends and (self.ends[0][0] < x or (right and self.ends[0][0] == x)):
            self.alive.pop(heapq.heappop(self.ends)[1], None)
        alive = list(self.alive.values())
        if right:
            i = int(np.searchsorted(self.seg_x, x, side="right")) - 1
        else:
            i = int(np.searchsorted(self.seg_x, x, side="left")) - 1
        return build_section(self.traj, x, alive, side, self.traj.boundary[max(i, 0)])


# Extension --------------------------------------------------------------------

class Extended(NamedTuple):
    """Full-line piecewise constant state: states[k] on (ys[k-1], ys[k]).

    The last breakpoint is the boundary b; above it the state is U_b.
    """
    ys: np.ndarray
    states: list
    b: float

    def __call__(self, y):
        k = int(np.searchsorted(self.ys, y, side="right"))
        return self.states[k]

    def total_variation(self):
        return float(sum(np.linalg.norm(np.subtract(b, a))
                         for a, b in zip(self.states[:-1], self.states[1:])))


def extend_section(sec):
    ys = np.append(sec.ys, sec.b)
    states = list(sec.states) + [sec.U_b]
    return Extended(ys, states, sec.b)


def extend(traj, x, side="right"):
    """U_E(x, .): the solution below b(x), the boundary state above."""
    from .tracking import sample_solution
    return extend_section(sample_solution(traj, x, side))


def _states_at(sec, ys):
    """States of the extended section at the points ys (array)."""
    idx = np.searchsorted(sec.ys, ys, side="right")
    return [sec.U_b if y >= sec.b else sec.states[k] for y, k in zip(ys, idx)]


# Y-metric -----------------------------------------------------------------------

def _pressure_tail_l1(inp1, inp2, x):
    """int_x^inf |p_1 - p_2| for the two step pressures."""
    if abs(inp1.pb_bar - inp2.pb_bar) > 1e-14 * max(1.0, abs(inp1.pb_bar)):
        raise ValueError("boundary pressures differ at infinity; the L1 distance is infinite")
    end = max(len(inp1.pb) * inp1.dx, len(inp2.pb) * inp2.dx)
    if end <= x:
        return 0.0
    pts = {x, end}
    for inp in (inp1, inp2):
        for h in range(1, len(inp.pb) + 1):
            t = h * inp.dx
            if x < t < end:
                pts.add(t)
    pts = sorted(pts)
    tot = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        m = 0.5 * (a + b)
        tot += (b - a) * abs(inp1.pb_at(m) - inp2.pb_at(m))
    return tot


def _aligned_l1(s1, s2):
    """int_{-inf}^0 |U_1(theta + b_1) - U_2(theta + b_2)| d theta."""
    th = np.concatenate([s1.ys - s1.b, s2.ys - s2.b, [0.0]])
    th = np.unique(th[th <= 0.0])
    if np.linalg.norm(np.subtract(s1.states[0], s2.states[0])) > 1e-12:
        raise ValueError("the two sections differ as y -> -inf")
    if len(th) < 2:
        return 0.0
    mid = 0.5 * (th[:-1] + th[1:])
    U1 = np.array(_states_at(s1, mid + s1.b))
    U2 = np.array(_states_at(s2, mid + s2.b))
    return float(np.sum(np.diff(th) * np.linalg.norm(U1 - U2, axis=1)))


class YParts(NamedTuple):
    total: float
    db: float
    l1: float
    dp: float


def y_distance_sections(s1, s2, inp1, inp2, x):
    """|b1 - b2| + ||U_1(.+b_1) - U_2(.+b_2)||_{L1(R-)} + ||p_1 - p_2||_{L1(x, inf)}."""
    db = abs(s1.b - s2.b)
    l1 = _aligned_l1(s1, s2)
    dp = _pressure_tail_l1(inp1, inp2, x)
    return YParts(db + l1 + dp, db, l1, dp)


def y_distance(run1, run2, x, parts=False):
    from .tracking import sample_solution
    r = y_distance_sections(sample_solution(run1, x), sample_solution(run2, x),
                            run1.inputs, run2.inputs, x)
    return r if parts else r.total


def plain_l1(s1, s2):
    """int_{-inf}^{b_max} |U_1E - U_2E| dy (no boundary alignment)."""
    e = np.unique(np.concatenate([s1.ys, s2.ys, [s1.b, s2.b]]))
    e = e[e <= max(s1.b, s2.b)]
    if len(e) < 2:
        return 0.0
    mid = 0.5 * (e[:-1] + e[1:])
    U1 = np.array(_states_at(s1, mid))
    U2 = np.array(_states_at(s2, mid))
    return float(np.sum(np.diff(e) * np.linalg.norm(U1 - U2, axis=1)))


# h-decomposition ----------------------------------------------------------------

def hugoniot_branch(U, j, h, gamma):
    """S_j(h)(U): the j-Hugoniot state with the j-isentrope's density at h."""
    if h == 0.0:
        return FlowState(*U)
    rho = isentrope_density(U, j, h, gamma)
    return hugoniot_state(U, j, rho / U[3], gamma)[0]


def H_map(h, U, gamma):
    m1 = hugoniot_branch(U, 1, h[0], gamma)
    m3 = contact_curve(m1, h[1], h[2])
    return hugoniot_branch(m3, 4, h[3], gamma)


def H_map_strong(x, U, gamma):
    """Mixed-region map: S_1 parameterized by its density ratio x[0]."""
    m1 = hugoniot_state(U, 1, x[0], gamma)[0]
    m3 = contact_curve(m1, x[1], x[2])
    return hugoniot_branch(m3, 4, x[3], gamma)


def solve_h(Ua, Ub, gamma, strong=False, tol=H_TOL):
    """h with H(h; Ua) = Ub (strong: first entry is the 1-shock density ratio)."""
    ub = np.asarray(Ub, float)
    if not strong:
        if tuple(Ua) == tuple(Ub):
            return np.zeros(4), 0.0
        F = lambda h: np.asarray(H_map(h, Ua, gamma)) - ub
        x0 = linear_guess(Ua, Ub, gamma)
    else:
        F = lambda z: np.asarray(H_map_strong(z, Ua, gamma)) - ub
        r0 = density_ratio_for_pressure(Ua, Ub[2], gamma)
        G0 = hugoniot_state(Ua, 1, r0, gamma)[0]
        d0 = linear_guess(G0, Ub, gamma)
        x0 = np.array([r0, d0[1], d0[2], d0[3]])
    z, res = newton(F, x0, tol=tol)
    return z, res


@dataclass(frozen=True)
class LyapunovWeights:
    cu: tuple = (0.125, 0.5, 0.5, 0.25)
    cm: tuple = (0.5, 0.5, 0.5, 0.5)
    cl: tuple = (0.5, 0.5, 0.5, 0.5)
    B: float = 0.04
    kappa1: float = 200.0
    kappa2: float = 1600.0
    cb: float = 0.0625

    def c(self, case):
        return {"u": self.cu, "m": self.cm, "l": self.cl}[case]


def weight_inequality(w, gamma, Um, Up, s0):
    """Left side of |K_s4| (c4/c1) (lam4(U+) - s0)/(lam1(U+) - s0) (must be < gamma0)."""
    from .riemann import coefficients_Ks
    Ks4 = abs(coefficients_Ks(Um, s0, gamma)[3])
    lam = eigenvalues(Up, gamma)
    return Ks4 * (w.cu[3] / w.cu[0]) * abs((lam[3] - s0) / (lam[0] - s0))


def calibrate_weights(gamma, Um, Up, s0, eps, gamma0=0.5, kappa1=None, kappa2=None, cb=0.0625):
    """Grid search over powers of 2 for (c1^u, c4^u, c4^m).

    Constraints: c1^u |K_b4| < c4^u (boundary reflection case), c4^u < c4^m
    (strong-shock crossing case), all < 1, and the Ks4 inequality below
    gamma0 when a strong shock is present.  The first feasible triple in
    decreasing order is kept.  B = 4 eps; kappa1 = 8 / B and kappa2 = 8 kappa1
    unless given.
    """
    from .riemann import coefficient_Kb4
    Kb4 = abs(coefficient_Kb4(Up, gamma))
    B = 4.0 * eps
    if not B < 1.0:
        raise ValueError(f"B = 4 eps = {B} must stay below 1")
    k1 = 8.0 / B if kappa1 is None else kappa1
    k2 = 8.0 * k1 if kappa2 is None else kappa2
    grid = [2.0 ** -k for k in range(1, 7)]
    for c4m in grid:
        for c4u in grid:
            if not c4u < c4m:
                continue
            for c1u in grid:
                if not (c1u < c4u and c1u * Kb4 < c4u):
                    continue
                w = LyapunovWeights(cu=(c1u, 0.5, 0.5, c4u), cm=(0.5, 0.5, 0.5, c4m),
                                    cl=(0.5, 0.5, 0.5, 0.5), B=B, kappa1=k1, kappa2=k2, cb=cb)
                if s0 is not None and not weight_inequality(w, gamma, Um, Up, s0) < gamma0:
                    continue
                return w
    raise ValueError("no admissible power-of-2 weights")


def default_lyapunov_weights(run1, run2):
    inp = run1.inputs

    def eps_of(t):
        # total strength of the weak waves at x = 0 (the quantity B must dominate)
        if t.params.eps_admit is not None:
            return t.params.eps_admit
        return float(sum(f.size for f in t.fronts if f.x0 == 0.0 and f.family != NP))

    eps = max(eps_of(run1), eps_of(run2), 1e-6)
    s0 = inp.s0 if run1.strong else None
    return calibrate_weights(inp.gamma, inp.Um, inp.Up, s0, eps)


@dataclass
class HDecomposition:
    edges: np.ndarray           # merged mesh, intervals (edges[k], edges[k+1])
    h: np.ndarray               # (N, 4); mixed cells hold log(density ratio) in column 0
    q: np.ndarray               # (N, 4) weighted strengths (q1 = B on mixed cells)
    case: list                  # "u" | "m" | "l" per cell
    flipped: np.ndarray         # True where the decomposition runs from U2 to U1
    failed: np.ndarray
    residual: float
    h_b: np.ndarray
    q_b: np.ndarray
    U1: list = field(default_factory=list)
    U2: list = field(default_factory=list)


class _HCache:
    def __init__(self, gamma):
        self.gamma = gamma
        self.d = {}

    def get(self, Ua, Ub, strong):
        key = (tuple(Ua), tuple(Ub), strong)
        r = self.d.get(key)
        if r is None:
            try:
                z, res = solve_h(Ua, Ub, self.gamma, strong)
                r = (z, res, False)
            except (SolverError, DomainError) as exc:
                warnings.warn(f"h-decomposition failed: {exc}")
                r = (np.zeros(4), math.inf, True)
            self.d[key] = r
        return r


def _region(sec, y):
    return "l" if sec.chi is not None and y < sec.chi else "u"


def decompose_sections(s1, s2, weights, gamma, cache=None):
    cache = cache or _HCache(gamma)
    bmax, bmin = max(s1.b, s2.b), min(s1.b, s2.b)
    e = np.unique(np.concatenate([s1.ys, s2.ys, [s1.b, s2.b]]))
    e = e[e <= bmax]
    N = max(len(e) - 1, 0)
    h = np.zeros((N, 4))
    q = np.zeros((N, 4))
    case, flipped, failed = [], np.zeros(N, bool), np.zeros(N, bool)
    mid = 0.5 * (e[:-1] + e[1:])
    U1 = _states_at(s1, mid)
    U2 = _states_at(s2, mid)
    res = 0.0
    for k in range(N):
        r1, r2 = _region(s1, mid[k]), _region(s2, mid[k])
        if r1 == r2:
            z, rr, bad = cache.get(U1[k], U2[k], False)
            c = weights.c(r1)
            case.append(r1)
            h[k] = z
            q[k] = np.multiply(c, z)
        else:
            flip = r1 == "u"
            Ua, Ub = (U2[k], U1[k]) if flip else (U1[k], U2[k])
            z, rr, bad = cache.get(Ua, Ub, True)
            case.append("m")
            flipped[k] = flip
            h[k] = (math.log(z[0]) if z[0] > 0 else 0.0, z[1], z[2], z[3])
            c = weights.cm
            q[k] = (weights.B, c[1] * z[1], c[2] * z[2], c[3] * z[3])
        failed[k] = bad
        if not bad:
            res = max(res, rr)
    # boundary values: U2(b_max) = H(h_b; U1(b_min))
    Ua = _states_at(s1, [bmin])[0]
    Ub = _states_at(s2, [bmax])[0]
    zb, rb, badb = cache.get(Ua, Ub, False)
    if not badb:
        res = max(res, rb)
    return HDecomposition(e, h, q, case, flipped, failed, res, zb, np.multiply(weights.cu, zb), U1, U2)


def h_decompose(run1, run2, x, weights=None):
    from .tracking import sample_solution
    w = weights or default_lyapunov_weights(run1, run2)
    return decompose_sections(sample_solution(run1, x), sample_solution(run2, x), w,
                              run1.inputs.gamma)


# A_i sums -----------------------------------------------------------------------

def _weak_waves(sec, run):
    """(y, run, family k, |alpha|, region) of the weak physical waves."""
    out = []
    for f in sec.fronts:
        if f.kind == "strong" or f.family == NP:
            continue
        y = f.y_at(sec.x)
        reg = _region(sec, y) if sec.chi is None or y != sec.chi else "u"
        if f.kind == "contact":
            a2, a3 = f.alphas
            if a2 != 0.0:
                out.append((y, run, 2, abs(a2), reg))
            if a3 != 0.0:
                out.append((y, run, 3, abs(a3), reg))
        else:
            out.append((y, run, f.family, abs(f.strength), reg))
    return out


def approaching_sums(waves, mid, q, case, B):
    """A_i(y) on every mesh cell (prefix sums)."""
    N = len(mid)
    A = np.zeros((N, 4))
    if N == 0:
        return A
    waves = sorted(waves, key=lambda t: t[0])
    ys = np.array([t[0] for t in waves]) if waves else np.zeros(0)
    pos = np.searchsorted(ys, mid, side="left")     # waves strictly below mid

    def cum(sel):
        v = np.array([t[3] if sel(t) else 0.0 for t in waves])
        c = np.concatenate([[0.0], np.cumsum(v)])
        below = c[pos]
        return below, c[-1] - below

    fam = {}
    for r in (1, 2):
        for k in (1, 2, 3, 4):
            fam[r, k] = cum(lambda t, r=r, k=k: t[1] == r and t[2] == k)
    F1 = cum(lambda t: t[2] == 1 and t[4] == "u")[1] + cum(lambda t: t[2] == 1 and t[4] == "l")[0]
    mixed = np.array([c == "m" for c in case])
    both_u = np.array([c == "u" for c in case])
    for i in range(1, 5):
        Bi = sum(fam[r, k][0] for r in (1, 2) for k in range(i + 1, 5)) \
            + sum(fam[r, k][1] for r in (1, 2) for k in range(1, i))
        Ci = np.where(q[:, i - 1] < 0, fam[1, i][0] + fam[2, i][1],
                      np.where(q[:, i - 1] > 0, fam[2, i][0] + fam[1, i][1], 0.0))
        if i == 1:
            Dc = np.where(mixed, B, 0.0)
        elif i in (2, 3):
            Dc = np.where(both_u, B, 0.0)
        else:
            Dc = np.zeros(N)
        extra = np.where(mixed, F1, Ci) if i == 1 else Ci
        A[:, i - 1] = Bi + (B - Dc) + extra
    return A


def approaching_sums_bruteforce(waves, mid, q, case, B):
    """Direct O(N M) scan of the B_i, C_i, D_i, F_i definitions (oracle)."""
    A = np.zeros((len(mid), 4))
    for n, y in enumerate(mid):
        for i in range(1, 5):
            Bi = Ci = Fi = 0.0
            for (ya, r, k, s, reg) in waves:
                if (ya < y and i < k <= 4) or (ya > y and 1 <= k < i):
                    Bi += s
                if k == i:
                    if q[n, i - 1] < 0 and ((r == 1 and ya < y) or (r == 2 and ya > y)):
                        Ci += s
                    if q[n, i - 1] > 0 and ((r == 2 and ya < y) or (r == 1 and ya > y)):
                        Ci += s
                if k == 1 and ((ya > y and reg == "u") or (ya < y and reg == "l")):
                    Fi += s
            mixed = case[n] == "m"
            Dc = B if (i == 1 and mixed) or (i in (2, 3) and case[n] == "u") else 0.0
            A[n, i - 1] = Bi + B - Dc + (Fi if (i == 1 and mixed) else Ci)
    return A


# The functional -----------------------------------------------------------------

def _run_Q(traj, sec):
    inp = traj.inputs
    x = sec.x
    h = int(math.floor(x / inp.dx + 1e-12))
    om = inp.omega()
    omf = float(np.sum(om[h:])) if h < len(om) else 0.0
    omf += abs(sec.U_b[2] - inp.pb_at(x))
    w = traj.meta.get("weights") or traj.params.weights or fn.FunctionalWeights()
    return fn.interaction_potential(sec.fronts, w, omf)


class FrakReport(NamedTuple):
    x: float
    integral: float             # sum_i int W_i |q_i| dy
    W_max: float
    W_min: float
    h_b: tuple
    residual: float
    n_failed: int


def frak_sections(s1, s2, Q1, Q2, weights, gamma, cache=None, return_parts=False):
    dec = decompose_sections(s1, s2, weights, gamma, cache)
    N = len(dec.edges) - 1
    if N <= 0:
        rep = FrakReport(s1.x, 0.0, 1.0, 1.0, tuple(dec.h_b), dec.residual, 0)
        return (rep, dec, None) if return_parts else rep
    mid = 0.5 * (dec.edges[:-1] + dec.edges[1:])
    waves = _weak_waves(s1, 1) + _weak_waves(s2, 2)
    A = approaching_sums(waves, mid, dec.q, dec.case, weights.B)
    W = 1.0 + weights.kappa1 * A + weights.kappa2 * (Q1 + Q2)
    ok = ~dec.failed
    L = np.diff(dec.edges)
    val = float(np.sum((L[:, None] * W * np.abs(dec.q))[ok]))
    rep = FrakReport(s1.x, val, float(W.max()), float(W.min()), tuple(dec.h_b), dec.residual,
                     int(np.sum(dec.failed)))
    return (rep, dec, A) if return_parts else rep


def lyapunov_functional(run1, run2, x, weights=None, with_boundary=True):
    """F(U_1(x), U_2(x)) = c_b int_0^x (|h_b1| + |h_b4|) + sum_i int W_i |q_i| dy."""
    from .tracking import sample_solution
    w = weights or default_lyapunov_weights(run1, run2)
    s1, s2 = sample_solution(run1, x), sample_solution(run2, x)
    rep = frak_sections(s1, s2, _run_Q(run1, s1), _run_Q(run2, s2), w, run1.inputs.gamma)
    total = rep.integral
    if with_boundary and x > 0.0:
        total += w.cb * _boundary_integral(run1, run2, x, w)
    return total


def _event_xs(run1, run2, x_end):
    xs = {0.0}
    for t in (run1, run2):
        for ev in t.events:
            if ev.x <= x_end:
                xs.add(ev.x)
    return sorted(xs)


def _boundary_integral(run1, run2, x_end, w, cache=None):
    """int_0^x (|h_b1| + |h_b4|) with h_b taken at the midpoints of the event grid."""
    from .tracking import sample_solution
    cache = cache or _HCache(run1.inputs.gamma)
    xs = [t for t in _event_xs(run1, run2, x_end)] + [x_end]
    tot = 0.0
    for a, b in zip(xs[:-1], xs[1:]):
        if b <= a:
            continue
        m = 0.5 * (a + b)
        s1, s2 = sample_solution(run1, m), sample_solution(run2, m)
        hb = _hb_only(s1, s2, cache)
        tot += (b - a) * (abs(hb[0]) + abs(hb[3]))
    return tot


def _hb_only(s1, s2, cache):
    bmax, bmin = max(s1.b, s2.b), min(s1.b, s2.b)
    Ua = _states_at(s1, [bmin])[0]
    Ub = _states_at(s2, [bmax])[0]
    return cache.get(Ua, Ub, False)[0]


# Stability audit ----------------------------------------------------------------

class EventRecord(NamedTuple):
    x: float
    kind: str               # interior | outer | inner
    F_minus: float
    F_plus: float
    dF: float
    alpha: float            # wave strength at the boundary (inner/outer events)


@dataclass
class StabilityReport:
    records: list
    xs: np.ndarray
    F: np.ndarray               # total functional (integral + boundary term) at x+
    Y: np.ndarray
    db: np.ndarray
    l1: np.ndarray
    boundary_term: np.ndarray
    violations: list            # interior/outer events with dF > tol
    C_inner: float              # max (F+ - F-)/(F- |alpha|) over inner events
    C_F: float                  # fitted F(x) / (x mu + ||dp||_{L1(0,x)} + F(0))
    C_Y: float                  # fitted Y(x) / (x mu + ||dp||_{L1(0,x)} + Y(0))
    L_sharp: float              # max_x Y(x) / Y(0)
    b_ratio: float              # max |b1 - b2| / F
    W_max: float
    weights: LyapunovWeights
    mu: float

    def summary(self):
        return {"n_events": len(self.records), "violations": len(self.violations),
                "C_inner": self.C_inner, "C_F": self.C_F, "C_Y": self.C_Y,
                "L_sharp": self.L_sharp, "b_ratio": self.b_ratio, "W_max": self.W_max}


def _pressure_l1(inp1, inp2, x):
    return _pressure_tail_l1(inp1, inp2, 0.0) - _pressure_tail_l1(inp1, inp2, x)


def _classify(traj, ev, b_self, b_other):
    if ev.kind in ("boundary", "pressure"):
        return "outer" if b_self >= b_other else "inner"
    return "interior"


def _event_alpha(traj, ev):
    ids = ev.ids_in if ev.kind == "boundary" else ev.ids_out
    return float(sum(traj.fronts[i].size for i in ids)) if ids else 0.0


def _fit_ratio(num, den):
    ok = den > 0
    return float(np.max(num[ok] / den[ok])) if np.any(ok) else 0.0


def stability_audit(run1, run2, weights=None, tol_rel=1e-10, x_end=None):
    """Delta F at every event of the union timeline and the end-to-end bounds."""
    w = weights or default_lyapunov_weights(run1, run2)
    g = run1.inputs.gamma
    if x_end is None:
        x_end = min(run1.x_max, run2.x_max)
    cache = _HCache(g)
    sw1, sw2 = SectionSweep(run1), SectionSweep(run2)
    by_x = {}
    for r, t in ((1, run1), (2, run2)):
        for ev in t.events:
            if ev.x <= x_end:
                by_x.setdefault(ev.x, []).append((r, ev))
    xs = sorted(set(by_x) | {0.0, x_end})
    records, violations = [], []
    Fx, Yx, dbx, l1x, btx = [], [], [], [], []
    bint = 0.0
    hb_prev = None
    x_prev = 0.0
    W_max = 1.0

    def evaluate(x, side):
        s1, s2 = sw1.at(x, side), sw2.at(x, side)
        rep = frak_sections(s1, s2, _run_Q(run1, s1), _run_Q(run2, s2), w, g, cache)
        return s1, s2, rep

    for x in xs:
        s1m, s2m, rm = evaluate(x, "left")
        s1, s2, rp = evaluate(x, "right")
        W_max = max(W_max, rm.W_max, rp.W_max)
        if x > x_prev:
            hb_now = np.array(rm.h_b)
            bint += 0.5 * (x - x_prev) * (abs(hb_prev[0]) + abs(hb_prev[3]) + abs(hb_now[0]) + abs(hb_now[3]))
        hb_prev = np.array(rp.h_b)
        x_prev = x
        evs = by_x.get(x, [])
        if evs and x > 0.0:
            kinds = set()
            alpha = 0.0
            for r, ev in evs:
                t, bs, bo = (run1, s1m.b, s2m.b) if r == 1 else (run2, s2m.b, s1m.b)
                kinds.add(_classify(t, ev, bs, bo))
                if ev.kind in ("boundary", "pressure"):
                    alpha += _event_alpha(t, ev)
            kind = "inner" if "inner" in kinds else "outer" if "outer" in kinds else "interior"
            dF = rp.integral - rm.integral
            rec = EventRecord(x, kind, rm.integral, rp.integral, dF, alpha)
            records.append(rec)
            if kind != "inner" and dF > tol_rel * max(rm.integral, 1e-300):
                violations.append(rec)
        y = y_distance_sections(s1, s2, run1.inputs, run2.inputs, x)
        Fx.append(rp.integral + w.cb * bint)
        Yx.append(y.total)
        dbx.append(y.db)
        l1x.append(plain_l1(s1, s2))
        btx.append(w.cb * bint)
    xs = np.array(xs)
    Fx, Yx = np.array(Fx), np.array(Yx)
    mu = max(run1.params.mu, run2.params.mu)
    dp = np.array([_pressure_l1(run1.inputs, run2.inputs, x) for x in xs])
    C_F = _fit_ratio(Fx, xs * mu + dp + Fx[0])
    C_Y = _fit_ratio(Yx, xs * mu + dp + Yx[0])
    L_sharp = float(np.max(Yx / Yx[0])) if Yx[0] > 0 else 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        br = np.where(Fx > 0, np.array(dbx) / Fx, 0.0)
    ci = [(r.dF / (r.F_minus * r.alpha)) for r in records
          if r.kind == "inner" and r.alpha > 0 and r.F_minus > 0]
    return StabilityReport(records, xs, Fx, Yx, np.array(dbx), np.array(l1x), np.array(btx),
                           violations, max(ci) if ci else 0.0, C_F, C_Y, L_sharp,
                           float(np.max(br)), W_max, w, mu)
