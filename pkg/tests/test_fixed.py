import numpy as np
import pytest
from hypothesis import given, strategies as st

from vlcbo.channel import LinkBudget, rate
from vlcbo.errors import EmptyLedSet, Infeasible, OrientationInfeasible
from vlcbo.fixed import (QosSpec, alternating_optimize, budget_beamformer, cone_argmax, max_rate_at_budget,
                         orientation_step, solve_beamforming, solve_orientation)
from vlcbo.geometry import E3, RotationAngles, in_cone, pd_vector
from vlcbo.scenario import Scenario

LINK = LinkBudget()
EPS = LINK.signal_power


def qos_raw(c1, theta=np.deg2rad(30)):
    return QosSpec(rate_min=1.0, theta_max=theta, c1=c1, c2=float(np.sqrt(c1)))


def test_single_led_beamformer():
    bf = solve_beamforming([1e-5], qos_raw(1e-12), LINK)
    assert bf.p[0] == pytest.approx(0.1, rel=1e-8)
    assert bf.power == pytest.approx(EPS * 0.01, rel=1e-8)
    assert bf.rank_one


def test_two_led_matched_direction():
    g = np.array([1.0, 1.0]) * 1e-5
    c1 = 1e-12
    bf = solve_beamforming(g, qos_raw(c1), LINK)
    np.testing.assert_allclose(bf.p, np.sqrt(c1) * g / (g @ g), rtol=1e-8)


def test_unequal_gains_follow_gain_direction():
    g = np.array([3.0, 1.0, 0.0]) * 1e-6
    c1 = (2e-7) ** 2
    bf = solve_beamforming(g, qos_raw(c1), LINK)
    np.testing.assert_allclose(bf.p, np.sqrt(c1) * g / (g @ g), rtol=1e-7, atol=1e-14)
    assert bf.sdr_bound <= bf.power * (1 + 1e-7)


def test_caps_bind():
    g = np.array([1.0, 0.1]) * 1e-5
    c2 = 1.05e-5  # LED 1 alone at full swing is not enough
    bf = solve_beamforming(g, qos_raw(c2 ** 2), LINK)
    assert bf.p[0] == pytest.approx(1.0, abs=1e-7)
    assert g @ bf.p == pytest.approx(c2, rel=1e-7)


def test_zero_or_weak_channel_infeasible():
    with pytest.raises(Infeasible):
        solve_beamforming([0.0, 0.0], qos_raw(1e-12), LINK)
    with pytest.raises(Infeasible):
        solve_beamforming([1e-6, 1e-6], qos_raw((3e-6) ** 2), LINK)


@given(st.lists(st.floats(1e-7, 1e-5), min_size=1, max_size=6), st.floats(0.05, 0.9))
def test_beamformer_meets_rate_with_equality(gs, frac):
    g = np.array(gs)
    c2 = frac * g.sum()
    bf = solve_beamforming(g, qos_raw(c2 ** 2), LINK)
    assert g @ bf.p == pytest.approx(c2, rel=1e-6)
    assert np.all(bf.p <= LINK.amplitude_cap * (1 + 1e-9)) and np.all(bf.p >= 0)
    assert bf.power <= 1.05 * bf.sdr_bound + 1e-15


# ------------------------------------------------------------------ orientation

def test_cone_examples():
    np.testing.assert_allclose(cone_argmax([0, 0, 2.0], 0.5), E3)
    np.testing.assert_allclose(cone_argmax([1.0, 0, 0], np.deg2rad(30)), [0.5, 0, np.sqrt(3) / 2], atol=1e-15)
    np.testing.assert_allclose(cone_argmax([0, 0, -1.0], 0.3), [np.sin(0.3), 0, np.cos(0.3)])
    np.testing.assert_allclose(cone_argmax([0, 0, 0.0], 0.3), E3)


w_vec = st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda w: np.linalg.norm(w) > 1e-3)


@given(w_vec, st.floats(0, np.pi / 2), st.floats(0, 1), st.floats(-np.pi, np.pi))
def test_cone_argmax_is_optimal(w, theta_max, frac, omega):
    n = cone_argmax(w, theta_max)
    assert abs(np.linalg.norm(n) - 1) < 1e-12
    assert in_cone(n, theta_max, tol=1e-12)
    other = pd_vector(frac * theta_max, omega).n
    assert np.dot(w, n) >= np.dot(w, other) - 1e-12


def test_cone_argmax_vs_grid():
    rng = np.random.default_rng(0)
    th = np.linspace(0, 1, 1000)
    om = np.linspace(-np.pi, np.pi, 1000, endpoint=False)
    T, O = np.meshgrid(th, om, indexing="ij")
    for _ in range(100):
        w = rng.standard_normal(3)
        w /= np.linalg.norm(w)
        theta_max = rng.uniform(0.01, np.pi / 2)
        tt = T * theta_max
        vals = w[0] * np.sin(tt) * np.cos(O) + w[1] * np.sin(tt) * np.sin(O) + w[2] * np.cos(tt)
        assert abs(vals.max() - w @ cone_argmax(w, theta_max)) < 1e-4


def test_orientation_step_chases_visible_set():
    # LED 1 sits outside the FOV until the PD tilts towards LED 0
    d = np.array([[np.sin(np.deg2rad(50)), 0.0, np.cos(np.deg2rad(50))],
                  [np.sin(np.deg2rad(75)), 0.0, np.cos(np.deg2rad(75))]])
    steer = np.array([1e-6, 5e-6])[:, None] * d
    res = orientation_step(steer, d, np.deg2rad(60), np.deg2rad(30), E3)
    assert tuple(res.led_set) == (0, 1)
    np.testing.assert_allclose(res.n, [0.5, 0, np.sqrt(3) / 2], atol=1e-12)
    assert res.rounds == 2


def test_orientation_errors(snap, qos5):
    with pytest.raises(OrientationInfeasible):
        solve_orientation(np.full(9, 1e-4), snap, qos5)
    with pytest.raises(EmptyLedSet):
        solve_orientation(np.zeros(9), snap, qos5)


# ------------------------------------------------------------------ AO

def overhead_scenario():
    return Scenario(leds=np.array([[3.0, 3.0, 3.0]]), position=(3.0, 2.7), heading=np.pi / 2)


def test_single_overhead_led():
    sc = overhead_scenario()
    snap = sc.snapshot()
    np.testing.assert_allclose(snap.ue, [3, 3, 1])
    q = QosSpec.build(5.0, np.deg2rad(30), sc.abg, sc.link)
    res = alternating_optimize(snap, q)
    np.testing.assert_allclose(res.n, E3)
    assert res.iterations == 1 and res.converged
    g = 2e-4 / (2 * np.pi * 4)
    assert res.p[0] == pytest.approx(q.c2 / g, rel=1e-8)


def test_all_blocked_infeasible():
    sc = Scenario(leds=np.array([[3.0, 1.0, 3.0]]), position=(3.0, 2.7), heading=np.pi / 2)
    snap = sc.snapshot()
    assert snap.blocked.tolist() == [1]
    with pytest.raises(Infeasible):
        alternating_optimize(snap, QosSpec.build(1.0, 0.5, sc.abg, sc.link))


def test_ao_table2(sc, snap, qos5):
    res = alternating_optimize(snap, qos5)
    assert res.converged and res.iterations <= 10
    h = np.array(res.power_history)
    assert np.all(np.diff(h) <= 1e-6)
    assert not res.nonmonotone
    assert res.rate == pytest.approx(5.0, abs=1e-5)
    assert in_cone(res.n, qos5.theta_max, tol=1e-12)
    assert np.all(res.p <= sc.link.amplitude_cap + 1e-12)


def test_theta_and_oar_ordering(sc, snap):
    powers = {}
    for th in (15, 20, 30):
        q = QosSpec.build(5.0, np.deg2rad(th), sc.abg, sc.link)
        powers[th] = alternating_optimize(snap, q).power
        assert powers[th] <= alternating_optimize(snap, q, oar=False).power + 1e-12
    assert powers[30] <= powers[20] + 1e-8 and powers[20] <= powers[15] + 1e-8
    assert powers[30] < powers[15]


def test_sdr_is_tight_on_room_geometry(sc):
    rng = np.random.default_rng(2)
    q = QosSpec.build(5.0, np.deg2rad(30), sc.abg, sc.link)
    for _ in range(10):
        snap = sc.snapshot(position=rng.uniform(0.5, 5.5, 2), heading=rng.uniform(-np.pi, np.pi))
        try:
            bf = solve_beamforming(snap.gains(E3).g, q, sc.link)
        except Infeasible:
            continue
        assert bf.rank_one or bf.power <= 1.05 * bf.sdr_bound


# ------------------------------------------------------------------ fixed budget

def test_budget_beamformer():
    g = np.array([1.0, 2.0, 0.0])
    p = budget_beamformer(g, 0.01, LINK)
    np.testing.assert_allclose(p, np.sqrt(0.01 / EPS) * g / np.linalg.norm(g), rtol=1e-10)
    p = budget_beamformer(np.array([1.0, 10.0]), 0.4, LINK)
    assert p[1] == 1.0 and EPS * p @ p == pytest.approx(0.4, rel=1e-10)
    np.testing.assert_allclose(budget_beamformer(g, 10.0, LINK), [1, 1, 0])


def test_budget_rate_oar_dominates(sc):
    for pos in [(1.0, 1.0), (2.2, 4.1), (5.0, 0.7)]:
        snap = sc.snapshot(position=pos, heading=0.3)
        a = max_rate_at_budget(snap, np.deg2rad(30), 0.1)
        b = max_rate_at_budget(snap, np.deg2rad(30), 0.1, oar=False)
        assert a.rate >= b.rate - 1e-12
        assert a.power <= 0.1 + 1e-12
        assert a.rate == pytest.approx(rate(a.g, a.p, sc.abg, sc.link))


@given(st.lists(st.floats(1e-3, 1.0), min_size=1, max_size=6), st.floats(0.05, 0.95),
       st.lists(st.floats(0, 1), min_size=6, max_size=6))
def test_waterfill_is_minimum_norm(gs, frac, noise):
    from vlcbo.fixed import waterfill
    g = np.array(gs)
    target = frac * g.sum()
    p = waterfill(g, target, 1.0)
    assert g @ p == pytest.approx(target, rel=1e-12)
    assert np.all((p >= 0) & (p <= 1 + 1e-12))
    # any other feasible point: mix p with a random feasible one
    q = np.array(noise[:len(g)])
    if g @ q > 0:
        q = np.minimum(q * target / (g @ q), 1.0)
        if g @ q >= target * (1 - 1e-12):
            assert p @ p <= q @ q + 1e-12
