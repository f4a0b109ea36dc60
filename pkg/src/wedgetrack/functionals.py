"""Glimm-type functional, generation-order ledger and diagnostics.

The per-section functions work on a bottom-to-top list of fronts (objects with
``family``, ``kind``, ``strength``, ``alphas``, ``order`` and ``Ul``/``Ur``).
Trajectory-level audits live at the bottom of the module.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

NP = 5


@dataclass(frozen=True)
class FunctionalWeights:
    K_minus: float = 8.0
    K0: float = 4.0
    Ks: float = 0.75
    K: float = 8.0
    KK: float = 16.0        # the coefficient of Q in F


class FunctionalReport(NamedTuple):
    x: float
    L: float
    Q: float
    F: float
    NP_total: float
    U_below_dev: float
    U_above_dev: float
    L_m: tuple              # L_m[m-1] = weighted strength of fronts with order >= m


def front_size(f):
    """Unsigned strength |alpha| of a weak front (0 for the strong shock)."""
    if f.kind == "strong":
        return 0.0
    if f.kind == "contact":
        return abs(f.alphas[0]) + abs(f.alphas[1])
    return abs(f.strength)


def family_rank(f):
    # contacts count as family 2 for the approaching rules
    return 2 if f.family in (2, 3) else f.family


def is_shock(f):
    return f.kind == "shock"


def strong_index(fronts):
    for k, f in enumerate(fronts):
        if f.kind == "strong":
            return k
    return None


def _attrs(f):
    # WaveFront caches these; other front-like objects are computed on the fly
    try:
        return f.mag, f.rank, f.shock
    except AttributeError:
        return front_size(f), family_rank(f), is_shock(f)


def weighted_strengths(fronts, weights):
    """b_alpha per front: K_minus |alpha| below the strong shock, |alpha| above."""
    k = strong_index(fronts)
    if k is None:
        return [_attrs(f)[0] for f in fronts]
    km = weights.K_minus
    return [km * _attrs(f)[0] for f in fronts[:k]] + [_attrs(f)[0] for f in fronts[k:]]


def _regions(fronts):
    k = strong_index(fronts)
    if k is None:
        return [list(range(len(fronts)))], k
    return [list(range(k)), list(range(k + 1, len(fronts)))], k


def approaching(fa, fb):
    """fa below fb: do they approach each other?"""
    ia, ib = family_rank(fa), family_rank(fb)
    if ia > ib:
        return True
    return ia == ib and (is_shock(fa) or is_shock(fb))


def interaction_terms(fronts, weights, b=None):
    """(A_s sum, A_b sum, pair sum) using per-family running sums, O(n)."""
    if b is None:
        b = weighted_strengths(fronts, weights)
    regions, k = _regions(fronts)
    As = Ab = pairs = 0.0
    for ri, reg in enumerate(regions):
        # S[f]: sum of b over fronts of rank f seen so far (below), Sh: shocks only
        S1 = S2 = S4 = S5 = 0.0
        Sh1 = Sh4 = 0.0
        for i in reg:
            bi = b[i]
            if bi == 0.0:
                continue
            _, fam, sh = _attrs(fronts[i])
            if fam == 1:
                pairs += bi * (S2 + S4 + S5 + (S1 if sh else Sh1))
                S1 += bi
                if sh:
                    Sh1 += bi
            elif fam == 2:
                pairs += bi * (S4 + S5)
                S2 += bi
            elif fam == 4:
                pairs += bi * (S5 + (S4 if sh else Sh4))
                S4 += bi
                if sh:
                    Sh4 += bi
                Ab += bi
            else:
                S5 += bi
                Ab += bi
        if k is not None:
            if ri == 0:
                As += S1 + S2 + S4 + S5
            else:
                As += S1
    return As, Ab, pairs


def interaction_terms_bruteforce(fronts, weights):
    """O(n^2) reference implementation of :func:`interaction_terms`."""
    b = weighted_strengths(fronts, weights)
    regions, k = _regions(fronts)
    As = Ab = pairs = 0.0
    for ri, reg in enumerate(regions):
        for a, i in enumerate(reg):
            fi = fronts[i]
            if k is not None and (ri == 0 or family_rank(fi) == 1):
                As += b[i]
            if family_rank(fi) in (4, NP):
                Ab += b[i]
            for j in reg[a + 1:]:
                if approaching(fi, fronts[j]):
                    pairs += b[i] * b[j]
    return As, Ab, pairs


def interaction_potential(fronts, weights, omega_future=0.0):
    As, Ab, pairs = interaction_terms(fronts, weights)
    return weights.K0 * omega_future + weights.Ks * As + Ab + weights.K * pairs


def np_total(fronts):
    return sum(abs(f.strength) for f in fronts if f.family == NP)


def per_order_strengths(fronts, b):
    if not fronts:
        return ()
    mmax = max(f.order for f in fronts)
    acc = [0.0] * (mmax + 1)
    for f, bi in zip(fronts, b):
        acc[f.order] += bi
    out = []
    run = 0.0
    for m in range(mmax, 0, -1):
        run += acc[m]
        out.append(run)
    return tuple(reversed(out))


def glimm_functional(fronts, weights, omega_future=0.0, refs=None, x=0.0):
    """Glimm functional F = L + KK Q + |U_dia - U-| + |U^dia - U+|."""
    b = weighted_strengths(fronts, weights)
    L = float(sum(b))
    As, Ab, pairs = interaction_terms(fronts, weights, b)
    Q = weights.K0 * omega_future + weights.Ks * As + Ab + weights.K * pairs
    k = strong_index(fronts)
    dlo = dhi = 0.0
    if k is not None and refs is not None:
        Um, Up = refs
        s = fronts[k]
        dlo = float(np.linalg.norm(np.subtract(s.Ul, Um)))
        dhi = float(np.linalg.norm(np.subtract(s.Ur, Up)))
    F = L + weights.KK * Q + dlo + dhi
    return FunctionalReport(x, L, Q, F, np_total(fronts), dlo, dhi, per_order_strengths(fronts, b))


def per_order_potential(fronts, weights, m):
    """Q_m: the Q terms restricted to fronts (pairs) with order >= m."""
    b = weighted_strengths(fronts, weights)
    regions, k = _regions(fronts)
    As = Ab = pairs = 0.0
    for ri, reg in enumerate(regions):
        for a, i in enumerate(reg):
            fi = fronts[i]
            if fi.order >= m:
                if k is not None and (ri == 0 or family_rank(fi) == 1):
                    As += b[i]
                if family_rank(fi) in (4, NP):
                    Ab += b[i]
            for j in reg[a + 1:]:
                if max(fi.order, fronts[j].order) >= m and approaching(fi, fronts[j]):
                    pairs += b[i] * b[j]
    return weights.Ks * As + Ab + weights.K * pairs


# Default weights ----------------------------------------------------------

def _strong_lipschitz(Ul, s, gamma, h=1e-6):
    # C2: Lipschitz constant of U -> G(s; U) in the Euclidean norm
    from .curves import strong_shock_by_speed
    G0 = np.array(strong_shock_by_speed(s, Ul, gamma))
    best = 0.0
    for k in range(4):
        e = np.zeros(4)
        e[k] = h * max(1.0, abs(Ul[k]))
        G1 = np.array(strong_shock_by_speed(s, tuple(np.array(Ul) + e), gamma))
        best = max(best, np.linalg.norm(G1 - G0) / np.linalg.norm(e))
    return best


def wall_pressure_slope(U, gamma):
    """P = |dp/dalpha| of the 1-family at U (equal to that of the 4-family at v = 0)."""
    from .gas import eigenvectors
    R = eigenvectors(U, gamma)
    return max(abs(R[0][2]), abs(R[3][2]))


def _k0_for(P, Ks, KK):
    # a sub-threshold front crossing the wall shifts p(U_b) by at most P |alpha|
    # (|U_r - U_l| for NP fronts), so K0 P < 1 + 1/KK; releasing that mismatch
    # costs (Ks + 1/KK) |alpha|, so K0 P > Ks + 1/KK.
    # a power of 2 when one fits, otherwise the midpoint of the interval
    upper = (1.0 + 1.0 / KK) / max(P, 1.0)
    lower = (Ks + 1.0 / KK) / P
    if not lower < upper:
        warnings.warn(f"empty K0 interval ({lower:.4g}, {upper:.4g}); using the release bound")
        return lower * (1.0 + 1.0 / KK)
    K0 = 2.0 ** math.floor(math.log2(upper * (1.0 - 1e-9)))
    if not K0 > lower:
        K0 = 0.5 * (lower + upper)
    return K0


@functools.lru_cache(maxsize=32)
def default_weights(gamma, Um, s0, Up=None):
    """Weights from the background coefficients.

    Strong-shock mode (s0 given): K_minus = 2 max|K_hat| + 4 C2 rounded up to
    a power of 2 and Ks one eighth into its admissible interval.  K0 follows
    from the wall pressure slope (see ``_k0_for``); K and KK are calibrated.
    """
    KK, K = 16.0, 8.0
    if s0 is None:
        P = wall_pressure_slope(Up or Um, gamma)
        return FunctionalWeights(K_minus=1.0, K0=_k0_for(P, 0.0, KK), Ks=0.5625, K=K, KK=KK)
    from .riemann import coefficients_Khat
    from .curves import strong_shock_by_speed
    Khat = coefficients_Khat(Um, s0, gamma)
    C2 = _strong_lipschitz(Um, s0, gamma)
    km = 2.0 * float(np.max(np.abs(Khat))) + 4.0 * C2
    K_minus = 2.0 ** math.ceil(math.log2(km))
    Up = strong_shock_by_speed(s0, Um, gamma)
    lo, hi = weight_constraints(gamma, Um, s0)
    if not lo < hi:
        raise ValueError(f"no admissible Ks: interval ({lo}, {hi})")
    Ks = lo + 0.125 * (hi - lo)
    P = wall_pressure_slope(Up, gamma)
    return FunctionalWeights(K_minus=K_minus, K0=_k0_for(P, Ks, KK), Ks=Ks, K=K, KK=KK)


def weight_constraints(gamma, Um, s0):
    """(max(1/2,|K_s4|), min(1, 1/|K_b4|)) at the background."""
    from .riemann import coefficient_Kb4, coefficients_Ks
    from .curves import strong_shock_by_speed
    Up = strong_shock_by_speed(s0, Um, gamma)
    Ks4 = abs(coefficients_Ks(Um, s0, gamma)[3])
    Kb4 = abs(coefficient_Kb4(Up, gamma))
    return max(0.5, Ks4), min(1.0, 1.0 / Kb4)


# Trajectory audits ----------------------------------------------------------

class Violation(NamedTuple):
    index: int
    x: float
    dF: float
    event: object


def monotonicity_audit(traj, tol=None):
    """Events at which F increased by more than tol (default 1e-12 F(0))."""
    F = traj.series["F"]
    if len(F) == 0:
        return []
    if tol is None:
        tol = 1e-12 * max(F[0], 1e-300)
    dF = np.diff(F)
    bad = np.nonzero(dF > tol)[0]
    return [Violation(int(k), float(traj.series["x"][k + 1]), float(dF[k]), traj.events[k]) for k in bad]


def functional_at(traj, x, side="right"):
    from .tracking import sample_solution
    sec = sample_solution(traj, x, side)
    inp = traj.inputs
    h = int(math.floor(x / inp.dx + 1e-12))
    om = inp.omega()
    omf = float(np.sum(om[h:])) if h < len(om) else 0.0
    omf += abs(sec.U_b[2] - inp.pb_at(x))
    w = traj.meta.get("weights") or traj.params.weights or FunctionalWeights()
    refs = (inp.Um, inp.Up) if traj.strong else None
    return glimm_functional(sec.fronts, w, omf, refs, x)


def total_variation(section, exclude_strong=True):
    """TV of U(x, .) on (-inf, b(x)); the strong-shock jump is left out by default."""
    tv = 0.0
    for f in section.fronts:
        if exclude_strong and f.kind == "strong":
            continue
        tv += float(np.linalg.norm(np.subtract(f.Ur, f.Ul)))
    return tv


def tv_ratio(traj, xs, data_tv):
    """max_x TV(U(x,.)) / TV(data) over the sample abscissae."""
    from .tracking import sample_solution
    if data_tv <= 0.0:
        return 0.0
    return max(total_variation(sample_solution(traj, x)) for x in xs) / data_tv


class GenerationLedger(NamedTuple):
    sup_L: tuple        # sup_x L_m, m = 1, 2, ...
    sup_Q: tuple        # sup_x Q_m on the sampled sections
    eta: Optional[float]
    np_by_order: dict   # order -> total NP strength created
    bound_ok: bool      # sup L_m <= KK sup Q_{m-1} for m >= 2


def generation_ledger(traj, n_samples=60):
    """Per-order strengths L_m, Q_m and the fitted decay ratio eta."""
    from .tracking import fit_decay, sample_solution
    w = traj.meta.get("weights") or FunctionalWeights()
    sup_L = tuple(traj.meta.get("sup_Lm", ()))
    xs = event_sample_points(traj, n_samples)
    mmax = max(len(sup_L), 1)
    sup_Q = [0.0] * mmax
    for x in xs:
        fronts = sample_solution(traj, x).fronts
        for m in range(1, mmax + 1):
            sup_Q[m - 1] = max(sup_Q[m - 1], per_order_potential(fronts, w, m))
    npo = {}
    for o, s in traj.meta.get("np_created", []):
        npo[o] = npo.get(o, 0.0) + s
    ok = all(sup_L[m] <= w.KK * sup_Q[m - 1] * (1 + 1e-9) + 1e-15 for m in range(1, len(sup_L)))
    return GenerationLedger(sup_L, tuple(sup_Q), fit_decay(sup_L), npo, ok)


def event_sample_points(traj, n):
    xs = sorted(set([0.0] + [e.x for e in traj.events]))
    if len(xs) > n:
        idx = np.linspace(0, len(xs) - 1, n).round().astype(int)
        xs = [xs[i] for i in sorted(set(idx))]
    return xs


def _flux_pair(U, gamma):
    from .gas import flux_H, flux_W
    return flux_W(U, gamma), flux_H(U, gamma)


class ConservationResidual(NamedTuple):
    total: np.ndarray       # fronts + boundary, per conserved component
    fronts: np.ndarray
    physical: np.ndarray
    nonphysical: np.ndarray
    boundary: np.ndarray
    boundary_mass_max: float    # max |b' rho u - rho v| over boundary segments


def conservation_residual(traj, testfn, x_end=None, nq=6):
    """Discrete weak-form residual of the divergence-theorem identity.

    For each front the jump s[W] - [H] is integrated against the test function
    along the front; the boundary contributes (b' W - H)(U_b).  ``testfn(x, y)``
    must be vectorized and vanish for x >= x_end.
    """
    g = traj.inputs.gamma
    if x_end is None:
        x_end = traj.x_max
    t, wq = np.polynomial.legendre.leggauss(nq)
    phys = np.zeros(4)
    nonp = np.zeros(4)
    for f in traj.fronts:
        a = f.x0
        b = min(f.x_end if f.x_end is not None else traj.x_max, x_end)
        if b <= a:
            continue
        xs = 0.5 * (b - a) * t + 0.5 * (a + b)
        I = 0.5 * (b - a) * float(np.dot(wq, testfn(xs, f.y_at(xs))))
        Wl, Hl = _flux_pair(f.Ul, g)
        Wr, Hr = _flux_pair(f.Ur, g)
        jump = f.speed * (Wr - Wl) - (Hr - Hl)
        if f.family == NP:
            nonp += jump * I
        else:
            phys += jump * I
    bnd = np.zeros(4)
    mass_max = 0.0
    segs = traj.boundary
    for k, (x0, y0, sl, Ub, _) in enumerate(segs):
        x1 = segs[k + 1][0] if k + 1 < len(segs) else traj.x_max
        x1 = min(x1, x_end)
        if x1 <= x0:
            continue
        W, H = _flux_pair(Ub, g)
        integrand = sl * W - H
        mass_max = max(mass_max, abs(integrand[0]))
        xs = 0.5 * (x1 - x0) * t + 0.5 * (x0 + x1)
        I = 0.5 * (x1 - x0) * float(np.dot(wq, testfn(xs, y0 + sl * (xs - x0))))
        bnd += integrand * I
    # the mass term is zero by the slip condition; the remaining components
    # only vanish for test functions supported away from the boundary
    fr = phys + nonp
    return ConservationResidual(fr + bnd, fr, phys, nonp, bnd, mass_max)


class EntropyViolation(NamedTuple):
    front_id: int
    production: float


def entropy_production(f, gamma, a_of_S=None):
    """Entropy production m (a(S_r) - a(S_l)) of a front, m = rho (v - s u)."""
    from .gas import entropy
    if a_of_S is None:
        a_of_S = lambda S: S
    if f.kind in ("contact", "nonphysical"):
        return 0.0
    m = f.Ul[3] * (f.Ul[1] - f.speed * f.Ul[0])
    return m * (a_of_S(entropy(f.Ur, gamma)) - a_of_S(entropy(f.Ul, gamma)))


def entropy_audit(traj, a_of_S=None, tol=1e-12):
    """Shock fronts whose entropy production is negative (beyond tol)."""
    g = traj.inputs.gamma
    out = []
    for f in traj.fronts:
        if f.kind not in ("shock", "strong"):
            continue
        P = entropy_production(f, g, a_of_S)
        dens_ok = (f.Ur[3] > f.Ul[3]) if f.family == 1 else (f.Ul[3] > f.Ur[3])
        if P < -tol or not dens_ok:
            out.append(EntropyViolation(f.id, P))
    return out


def rh_audit(traj, tol=1e-9):
    """Shock fronts whose jump-condition residual exceeds tol (2x2 conditions for potential runs)."""
    from .gas import rh_residual
    from .potential import pf_rh_residual
    g = traj.inputs.gamma
    bad = []
    for f in traj.fronts:
        if f.kind in ("shock", "strong"):
            if traj.system == "euler":
                r = rh_residual(f.Ul, f.Ur, f.speed, g)
            else:
                r = pf_rh_residual(f.Ul, f.Ur, f.speed)
            if r > tol:
                bad.append((f.id, r))
    return bad
