import numpy as np
import pytest
from hypothesis import given, strategies as st

from linksched.errors import InvalidInstanceError
from linksched.model import (
    BirthDeathRates,
    ChannelModel,
    Policy,
    SteadyState,
    SystemInstance,
    TrafficModel,
    average_delay,
    average_power,
    derive_rates,
    evaluate_policy,
    packet_loss,
    power_threshold,
    steady_state,
)
from linksched.simulate import SimConfig, simulate
from oracles import random_channel, stationary_by_squaring


def random_policy(rng, Q, M, top_g_zero=True):
    g = rng.uniform(0, 1, (Q + 1, M))
    f = rng.uniform(0, 1, (Q + 1, M))
    if top_g_zero:
        # the simulator drops an arrival into a full buffer before serving,
        # so g at the top row only matches the chain when it is zero
        g[Q] = 0.0
    return Policy(g, f)


@st.composite
def chains(draw, max_q=20, max_m=4):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    Q = draw(st.integers(1, max_q))
    M = draw(st.integers(1, max_m))
    channel = random_channel(rng, M)
    traffic = TrafficModel(draw(st.floats(0.05, 0.95)))
    return random_policy(rng, Q, M, top_g_zero=False), traffic, channel


# ---- types ----------------------------------------------------------------


def test_channel_validation():
    with pytest.raises(InvalidInstanceError, match="sum to 1"):
        ChannelModel((0.5, 0.6), (1, 2))
    with pytest.raises(InvalidInstanceError, match="non-decreasing"):
        ChannelModel((0.5, 0.5), (3, 1))
    with pytest.raises(InvalidInstanceError, match="positive"):
        ChannelModel((1.0, 0.0), (1, 2))
    with pytest.raises(InvalidInstanceError, match="entries"):
        ChannelModel((0.5, 0.5), (1, 2, 3))


def test_traffic_xi_is_stored_exactly():
    t = TrafficModel(0.4)
    assert t.xi == (1 - 0.4) / 0.4
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(InvalidInstanceError):
            TrafficModel(bad)


def test_instance_validation(ref_channel):
    with pytest.raises(InvalidInstanceError):
        SystemInstance(ref_channel, TrafficModel(0.5), 0, 1.0)
    with pytest.raises(InvalidInstanceError):
        SystemInstance(ref_channel, TrafficModel(0.5), 10, 0.0)
    assert SystemInstance(ref_channel, TrafficModel(0.5), 10, 1.0).with_budget(2.0).p_max == 2.0


def test_policy_range_and_immutability():
    with pytest.raises(InvalidInstanceError):
        Policy(np.full((3, 2), 1.5), np.zeros((3, 2)))
    p = Policy.constant(3, 2, 0.5)
    with pytest.raises(ValueError):
        p.g[0, 0] = 0.0


def test_steady_state_clamps_tiny_negatives():
    ss = SteadyState([0.5, 0.5 + 5e-13, -5e-13])
    assert ss.pi.min() == 0.0
    assert ss.pi.sum() == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(InvalidInstanceError):
        SteadyState([0.6, 0.6, -0.2])


# ---- derive_rates -----------------------------------------------------------


def test_rates_full_transmission(ref_channel):
    r = derive_rates(Policy.constant(6, 3, 1.0), TrafficModel(0.5), ref_channel)
    assert np.all(r.lam == 0.0)
    assert np.allclose(r.mu, 0.5)


def test_rates_never_transmit(ref_channel):
    r = derive_rates(Policy.constant(6, 3, 0.0), TrafficModel(0.3), ref_channel)
    assert np.allclose(r.lam, 0.3)
    assert np.all(r.mu == 0.0)


def test_rates_two_state_hand_example():
    ch = ChannelModel((0.5, 0.5), (1, 2))
    g = np.tile([1.0, 0.0], (5, 1))
    r = derive_rates(Policy(g, g), TrafficModel(0.5), ch)
    assert np.allclose(r.lam, 0.25)
    assert np.allclose(r.mu, 0.25)


def test_rates_dimension_mismatch(ref_channel):
    with pytest.raises(InvalidInstanceError):
        derive_rates(Policy.constant(4, 2, 0.5), TrafficModel(0.5), ref_channel)


# ---- steady_state -----------------------------------------------------------


def test_steady_state_empty_queue_absorbs():
    ss = steady_state(BirthDeathRates(np.zeros(5), np.full(5, 0.3)))
    assert ss.pi.tolist() == [1.0, 0, 0, 0, 0, 0]


def test_steady_state_uniform():
    ss = steady_state(BirthDeathRates(np.full(4, 0.3), np.full(4, 0.3)))
    assert np.allclose(ss.pi, 0.2, atol=1e-15)


def test_steady_state_matches_squaring_q10():
    rng = np.random.default_rng(11)
    lam = rng.uniform(0.05, 0.45, 10)
    mu = rng.uniform(0.05, 0.45, 10)
    rates = BirthDeathRates(lam, mu)
    assert np.allclose(steady_state(rates).pi, stationary_by_squaring(rates), atol=1e-9)


def test_absorbing_tail_follows_the_run_from_empty():
    # state 3 cannot come back down and nothing leaves the top: mass piles at Q
    lam = np.array([0.3, 0.3, 0.3, 0.3])
    mu = np.array([0.2, 0.2, 0.0, 0.2])
    rates = BirthDeathRates(lam, mu)
    ss = steady_state(rates)
    assert np.allclose(ss.pi, stationary_by_squaring(rates), atol=1e-9)
    assert ss.pi[:3].sum() == 0.0


def test_reducible_chain_with_blocked_top():
    lam = np.array([0.3, 0.0, 0.2])
    mu = np.array([0.4, 0.1, 0.1])
    rates = BirthDeathRates(lam, mu)
    ss = steady_state(rates)
    assert np.allclose(ss.pi, stationary_by_squaring(rates), atol=1e-9)
    assert ss.pi[2:].sum() == 0.0


@given(chains())
def test_steady_state_normalized_and_balanced(case):
    policy, traffic, channel = case
    rates = derive_rates(policy, traffic, channel)
    pi = steady_state(rates).pi
    assert abs(pi.sum() - 1) <= 1e-10
    assert pi.min() >= 0
    flow_up = pi[:-1] * rates.lam
    flow_down = pi[1:] * rates.mu
    assert np.allclose(flow_up, flow_down, atol=1e-10)


@given(chains())
def test_steady_state_matches_squaring(case):
    policy, traffic, channel = case
    rates = derive_rates(policy, traffic, channel)
    assert np.allclose(steady_state(rates).pi, stationary_by_squaring(rates), atol=1e-9)


@given(chains())
def test_metric_ranges(case):
    policy, traffic, channel = case
    _, m = evaluate_policy(policy, traffic, channel)
    assert m.avg_delay >= 0
    assert 0 <= m.avg_power <= max(channel.power) + 1e-12
    assert 0 <= m.loss_prob <= traffic.alpha + 1e-15


@given(chains(max_q=12, max_m=3), st.data())
def test_raising_f_never_increases_delay(case, data):
    policy, traffic, channel = case
    i = data.draw(st.integers(1, policy.Q))
    m = data.draw(st.integers(0, policy.M - 1))
    f = policy.f.copy()
    f[i, m] = data.draw(st.floats(f[i, m], 1.0))
    before = evaluate_policy(policy, traffic, channel)[1].avg_delay
    after = evaluate_policy(Policy(policy.g, f), traffic, channel)[1].avg_delay
    assert after <= before + 1e-9


@given(chains())
def test_no_loss_when_top_transition_closed(case):
    policy, traffic, channel = case
    g = policy.g.copy()
    g[-2] = 1.0  # lambda_{Q-1} = 0
    ss, m = evaluate_policy(Policy(g, policy.f), traffic, channel)
    assert m.loss_prob == 0.0


# ---- metrics ----------------------------------------------------------------


def test_delay_examples():
    assert average_delay(SteadyState([1.0] + [0.0] * 10), TrafficModel(0.3)) == 0.0
    assert average_delay(SteadyState(np.full(11, 1 / 11)), TrafficModel(0.5)) == pytest.approx(10.0)


def test_power_examples(ref_channel):
    t = TrafficModel(0.5)
    ones = Policy.constant(10, 3, 1.0)
    ss = steady_state(derive_rates(ones, t, ref_channel))
    assert average_power(ones, ss, t, ref_channel) == pytest.approx(1.0, abs=1e-15)
    zeros = Policy.constant(10, 3, 0.0)
    ss0 = steady_state(derive_rates(zeros, t, ref_channel))
    assert average_power(zeros, ss0, t, ref_channel) == 0.0


def test_power_threshold_examples(ref_channel):
    assert power_threshold(TrafficModel(0.5), ref_channel) == pytest.approx(1.0, abs=1e-15)
    assert power_threshold(TrafficModel(0.3), ref_channel) == pytest.approx(0.6, abs=1e-15)
    assert power_threshold(TrafficModel(0.5), ChannelModel((1.0,), (2.0,))) == 1.0


@given(chains())
def test_full_transmission_power_equals_threshold(case):
    _, traffic, channel = case
    ones = Policy.constant(5, channel.M, 1.0)
    _, m = evaluate_policy(ones, traffic, channel)
    assert m.avg_power == pytest.approx(power_threshold(traffic, channel), rel=1e-15, abs=1e-15)


def test_loss_examples(ref_channel):
    t = TrafficModel(0.3)
    _, m = evaluate_policy(Policy.constant(5, 3, 0.0), t, ref_channel)
    assert m.loss_prob == pytest.approx(0.3)
    _, m1 = evaluate_policy(Policy.constant(5, 3, 1.0), t, ref_channel)
    assert m1.loss_prob == 0.0
    assert packet_loss(SteadyState([0.5, 0.5, 0.0]), t) == 0.0


# ---- simulator as oracle ------------------------------------------------------


def test_metrics_match_simulation_random_policy():
    rng = np.random.default_rng(5)
    ch = ChannelModel((0.4, 0.6), (1.0, 2.5))
    inst = SystemInstance(ch, TrafficModel(0.4), 5, 1.0)
    policy = random_policy(rng, 5, 2)
    _, m = evaluate_policy(policy, inst.traffic, ch)
    rep = simulate(policy, inst, SimConfig(1_000_000, seed=3))
    assert rep.empirical_delay == pytest.approx(m.avg_delay, rel=0.01)
    assert rep.empirical_power == pytest.approx(m.avg_power, rel=0.01)
    assert rep.drop_rate == pytest.approx(m.loss_prob, rel=0.05)


def test_delay_matches_simulation_q10():
    rng = np.random.default_rng(8)
    ch = random_channel(rng, 3)
    inst = SystemInstance(ch, TrafficModel(0.4), 10, 1.0)
    policy = random_policy(rng, 10, 3)
    _, m = evaluate_policy(policy, inst.traffic, ch)
    rep = simulate(policy, inst, SimConfig(1_000_000, seed=9))
    assert rep.empirical_delay == pytest.approx(m.avg_delay, rel=0.01)
