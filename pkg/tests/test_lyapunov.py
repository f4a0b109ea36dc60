import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wedgetrack import TrackingParams, run, sample_solution
from wedgetrack import lyapunov as ly
from wedgetrack.curves import hugoniot_state
from wedgetrack.scenario import Background, Scenario, random_small_data
from wedgetrack.tracking import CrossSection
from conftest import GAMMA

PRM = TrackingParams(x_max=0.8, mu=1e-3, nu=1e-7)
U0 = (2.0, 0.05, 1.0, 1.4)


@pytest.fixture(scope="module")
def pair():
    return run(random_small_data(11), PRM), run(random_small_data(11, dp=2e-4), PRM)


def _same_section(a, b):
    assert a.b == b.b and a.U_b == b.U_b
    assert [f.id for f in a.fronts] == [f.id for f in b.fronts]
    assert np.array_equal(a.ys, b.ys)


def test_sweep_matches_sample_solution(pair):
    t = pair[0]
    sw = ly.SectionSweep(t)
    xs = sorted({0.0, t.x_max} | {e.x for e in t.events[::7]})
    for x in xs:
        for side in ("left", "right"):
            _same_section(sw.at(x, side), sample_solution(t, x, side))
    with pytest.raises(ValueError):
        sw.at(0.0)


h_small = st.floats(-0.03, 0.03)


@given(h_small, h_small, h_small, h_small)
def test_h_recovery(h1, h2, h3, h4):
    # [DERIVED] solve_h inverts the Hugoniot composition
    Ub = ly.H_map((h1, h2, h3, h4), U0, GAMMA)
    z, res = ly.solve_h(U0, Ub, GAMMA)
    assert np.allclose(z, (h1, h2, h3, h4), atol=1e-9)
    assert res < 1e-10


@given(st.floats(-0.05, 0.05))
def test_pure_1_wave_gives_single_component(h1):
    Ub = ly.hugoniot_branch(U0, 1, h1, GAMMA)
    z, _ = ly.solve_h(U0, Ub, GAMMA)
    assert abs(z[0] - h1) < 1e-10
    assert np.max(np.abs(z[1:])) < 1e-10


def test_strong_h_recovers_density_ratio(background):
    Um, Up, s0, _ = background
    r = 1.3
    Ub = ly.H_map_strong((r, 0.01, -0.01, 0.005), Um, GAMMA)
    z, res = ly.solve_h(Um, Ub, GAMMA, strong=True)
    assert np.allclose(z, (r, 0.01, -0.01, 0.005), atol=1e-9)
    assert hugoniot_state(Um, 1, z[0], GAMMA)[0][3] == pytest.approx(Um[3] * r)


wave = st.tuples(st.floats(-1, 1), st.sampled_from([1, 2]), st.integers(1, 4),
                 st.floats(1e-4, 1e-2), st.sampled_from(["u", "l"]))


@given(st.lists(wave, max_size=20), st.lists(st.floats(-1, 1), min_size=1, max_size=8),
       st.data())
def test_approaching_sums_match_bruteforce(waves, mids, data):
    # [DERIVED] prefix sums vs the direct definitions
    mids = np.array(sorted(mids))
    N = len(mids)
    q = np.array(data.draw(st.lists(st.lists(st.floats(-1, 1), min_size=4, max_size=4),
                                    min_size=N, max_size=N)))
    case = data.draw(st.lists(st.sampled_from(["u", "m", "l"]), min_size=N, max_size=N))
    # wave positions never coincide with cell midpoints
    waves = [w for w in waves if not np.any(mids == w[0])]
    a = ly.approaching_sums(waves, mids, q, case, 0.04)
    b = ly.approaching_sums_bruteforce(waves, mids, q, case, 0.04)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-15)


def test_identical_runs_have_zero_distance(pair):
    t = pair[0]
    for x in (0.0, 0.4, 0.8):
        assert ly.y_distance(t, t, x) == 0.0
        assert ly.lyapunov_functional(t, t, x) == 0.0


def test_triangle_inequality():
    runs = [run(random_small_data(11, dp=d), PRM) for d in (0.0, 1e-4, 3e-4)]
    for x in (0.3, 0.8):
        d = lambda i, j: ly.y_distance(runs[i], runs[j], x)
        assert d(0, 2) <= d(0, 1) + d(1, 2) + 1e-15
        assert d(0, 1) == pytest.approx(d(1, 0), rel=1e-14)


def test_shift_bound(pair):
    # shifting a section by d: aligned distance 0, plain L1 at most |d| TV
    sec = sample_solution(pair[0], 0.5)
    d = 0.01
    sh = CrossSection(sec.x, sec.fronts, sec.ys + d, sec.states, sec.b + d, sec.U_b, None, None)
    e = ly.extend_section(sec)
    assert ly._aligned_l1(sec, sh) < 1e-15
    assert ly.plain_l1(sec, sh) <= d * e.total_variation() * (1 + 1e-12)


def test_pressure_at_infinity_must_match():
    a = run(Scenario(), TrackingParams(x_max=0.2))
    b = run(Scenario(background=Background(pb_bar=1.6)), TrackingParams(x_max=0.2))
    with pytest.raises(ValueError):
        ly.y_distance(a, b, 0.1)


def test_calibrated_weights_feasible(background):
    Um, Up, s0, _ = background
    w = ly.calibrate_weights(GAMMA, Um, Up, s0, eps=0.01)
    c1u, c4u, c4m = w.cu[0], w.cu[3], w.cm[3]
    assert c1u < c4u < c4m < 1
    assert ly.weight_inequality(w, GAMMA, Um, Up, s0) < 0.5
    assert w.B == pytest.approx(0.04)
    with pytest.raises(ValueError):
        ly.calibrate_weights(GAMMA, Um, Up, s0, eps=0.5)


def test_decomposition_residual(pair):
    dec = ly.h_decompose(*pair, 0.6)
    assert not dec.failed.any()
    assert dec.residual < 1e-10
    assert set(dec.case) <= {"u", "m", "l"}


def test_stability_audit_small_pair(pair):
    rep = ly.stability_audit(*pair)
    assert rep.violations == []
    assert rep.C_inner >= 0.0
    assert np.all(rep.Y >= rep.db)
    assert rep.L_sharp > 0


@settings(max_examples=3)
@given(st.integers(0, 1000))
def test_audit_random_pairs(seed):
    prm = TrackingParams(x_max=0.5, mu=1e-3, nu=1e-7)
    a = run(random_small_data(seed, ncell=5, nstep=4), prm)
    b = run(random_small_data(seed, ncell=5, nstep=4, dp=1e-4), prm)
    assert ly.stability_audit(a, b).violations == []
