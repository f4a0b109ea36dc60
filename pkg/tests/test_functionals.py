import numpy as np
import pytest
from hypothesis import given, strategies as st

from wedgetrack import TrackingParams, run
from wedgetrack import functionals as fn
from wedgetrack.scenario import Scenario, random_small_data
from wedgetrack.tracking import NP, WaveFront
from wedgetrack.gas import entropy
from conftest import GAMMA

U = (2.0, 0.0, 1.0, 1.4)
W = fn.FunctionalWeights(K_minus=16.0, K0=0.5, Ks=0.5625, K=8.0, KK=16.0)

front_spec = st.tuples(st.sampled_from(["r1", "s1", "c", "r4", "s4", "np"]),
                       st.floats(1e-4, 1e-2), st.integers(1, 4))


def _front(i, spec):
    kind, a, order = spec
    if kind == "c":
        return WaveFront(i, 2, "contact", a, 0.0, 0.0, 0.0, U, U, order, alphas=(a, -a / 2))
    if kind == "np":
        return WaveFront(i, NP, "nonphysical", a, 3.0, 0.0, 0.0, U, U, order)
    fam = int(kind[1])
    k = "rarefaction" if kind[0] == "r" else "shock"
    return WaveFront(i, fam, k, a if k == "rarefaction" else -a, 0.0, 0.0, 0.0, U, U, order)


def _fronts(specs, strong_at=None):
    out = [_front(i, s) for i, s in enumerate(specs)]
    if strong_at is not None:
        k = min(strong_at, len(out))
        out.insert(k, WaveFront(999, 1, "strong", 0.0, -0.5, 0.0, 0.0, U, U, 0))
    return out


@given(st.lists(front_spec, max_size=25), st.one_of(st.none(), st.integers(0, 25)))
def test_interaction_terms_match_bruteforce(specs, k):
    # [DERIVED] O(n) running sums vs the O(n^2) pair loop
    fr = _fronts(specs, k)
    a = fn.interaction_terms(fr, W)
    b = fn.interaction_terms_bruteforce(fr, W)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-300)


def test_approaching_rules():
    r1, s1, c, r4, s4 = (_front(0, (k, 1e-3, 1)) for k in ("r1", "s1", "c", "r4", "s4"))
    # a higher family below a lower one approaches
    assert fn.approaching(r4, r1) and fn.approaching(c, r1) and fn.approaching(r4, c)
    assert not fn.approaching(r1, r4)
    # same family: only if one of them is a shock
    assert fn.approaching(s1, r1) and fn.approaching(r1, s1)
    assert not fn.approaching(r1, r1)
    assert not fn.approaching(c, c)


def test_weighted_strengths_below_strong_shock():
    fr = _fronts([("r1", 1e-3, 1), ("r4", 2e-3, 1)], strong_at=1)
    b = fn.weighted_strengths(fr, W)
    assert b == [pytest.approx(16e-3), 0.0, pytest.approx(2e-3)]


def test_contact_size_and_family_rank():
    c = _front(0, ("c", 1e-3, 1))
    assert fn.front_size(c) == pytest.approx(1.5e-3)
    assert fn.family_rank(c) == 2


def test_per_order_strengths():
    fr = _fronts([("r1", 1.0, 1), ("r1", 2.0, 2), ("r4", 4.0, 3)])
    b = fn.weighted_strengths(fr, W)
    assert fn.per_order_strengths(fr, b) == (7.0, 6.0, 4.0)


def test_glimm_functional_composition():
    # [TRIVIAL] F = L + KK Q with Q = K0 omega + Ks As + Ab + K pairs
    fr = _fronts([("r4", 1e-3, 1), ("r1", 2e-3, 1)])
    rep = fn.glimm_functional(fr, W, omega_future=1e-3)
    As, Ab, pairs = fn.interaction_terms(fr, W)
    assert pairs == pytest.approx(2e-6)
    assert rep.Q == pytest.approx(W.K0 * 1e-3 + Ab + W.K * pairs)
    assert rep.F == pytest.approx(rep.L + W.KK * rep.Q)
    assert fn.glimm_functional([], W).F == 0.0


def test_default_weights_satisfy_constraints(background):
    Um, Up, s0, _ = background
    w = fn.default_weights(GAMMA, tuple(Um), s0)
    lo, hi = fn.weight_constraints(GAMMA, tuple(Um), s0)
    assert lo < w.Ks < hi
    P = fn.wall_pressure_slope(Up, GAMMA)
    assert w.K0 * P > w.Ks + 1 / w.KK
    assert w.K0 * max(P, 1.0) < 1 + 1 / w.KK
    assert w.K_minus >= 1.0


def test_default_weights_high_pressure_warns():
    from wedgetrack.scenario import Background
    Um, Up, s0, _ = Scenario(background=Background(pb_bar=3.0)).background_states()
    with pytest.warns(UserWarning):
        w = fn.default_weights.__wrapped__(GAMMA, tuple(Um), s0)
    P = fn.wall_pressure_slope(Up, GAMMA)
    assert w.K0 * P > w.Ks + 1 / w.KK


def test_entropy_production_sign():
    from wedgetrack.curves import shock_curve
    for j in (1, 4):
        Ur, s = shock_curve(U, j, -0.05, GAMMA)
        f = WaveFront(0, j, "shock", -0.05, s, 0.0, 0.0, U, Ur, 1)
        # downstream is above for 1-shocks and below for 4-shocks
        up, down = (U, Ur) if j == 1 else (Ur, U)
        assert entropy(down, GAMMA) > entropy(up, GAMMA)
        assert fn.entropy_production(f, GAMMA) != 0.0


@pytest.fixture(scope="module")
def traj():
    return run(random_small_data(7), TrackingParams(x_max=1.5, mu=1e-3, nu=1e-7))


def test_functional_at_matches_series(traj):
    # recomputing F from a section equals the recorded value after the event
    k = len(traj.events) // 2
    x = traj.series["x"][k + 1]
    rep = fn.functional_at(traj, x)
    assert rep.F == pytest.approx(traj.series["F"][k + 1], rel=1e-9)


def test_tv_ratio_bounded(traj):
    data = random_small_data(7).data_total_variation()
    xs = fn.event_sample_points(traj, 20)
    r = fn.tv_ratio(traj, xs, data)
    assert 0 < r < 50


def test_generation_ledger(traj):
    led = fn.generation_ledger(traj, n_samples=20)
    assert led.bound_ok
    assert led.eta is None or led.eta < 1.0
