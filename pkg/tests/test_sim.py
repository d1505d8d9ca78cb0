from datetime import datetime, timedelta

import numpy as np
import pytest

from ratchet_pricing import MarketParams
from ratchet_pricing import closed_form as cf
from ratchet_pricing import dp_oracle as dp
from ratchet_pricing import sim
from ratchet_pricing.errors import ValidationError

SET_A = MarketParams(0.0, 1.0, 2.0, (0.3, 0.5))
SET_B = MarketParams(0.0, 1.0, 4.0, (0.3, 0.6))


def test_mix64_reference_values():
    # SplitMix64 reference: state 0 gives 0xE220A8397B1DCDAF as its first output
    assert int(sim.mix64(np.uint64(0))) == 0xE220A8397B1DCDAF


def test_draws_are_pure_functions_of_the_counter():
    a = sim.draw_demand_path(11, 5, SET_A)
    b = sim.draw_demand_path(11, 5, SET_A)
    assert a.tolist() == b.tolist()
    block = sim.draw_demand_matrix(11, np.arange(10), SET_A)
    assert block[5].tolist() == a.tolist()
    u = sim.uniforms(11, np.arange(1000), 4)
    assert u.min() >= 0 and u.max() < 1


def test_near_certain_high_state():
    p = MarketParams.constant(0.0, 1.0, 2.0, 1 - 1e-9, 4)
    highs = sim.draw_demand_matrix(5, np.arange(10000), p)
    assert highs.all()


def test_high_frequency_within_three_standard_errors():
    p = MarketParams(0.0, 1.0, 2.0, (0.1, 0.5, 0.85))
    n = 10**6
    freq = sim.draw_demand_matrix(2024, np.arange(n), p).mean(axis=0)
    g = np.array(p.gammas)
    assert np.all(np.abs(freq - g) <= 3 * np.sqrt(g * (1 - g) / n))


def test_flexible_set_a_mean():
    rep = sim.run_mc(sim.SimConfig(SET_A, "flexible", 10**6, seed=1))
    assert abs(rep.mean_avg_price - 0.7) <= 3 * rep.stderr_avg_price


def test_regulated_t5_neutrality():
    p = MarketParams.constant(0.0, 1.0, 2.0, 0.5, 5, truncated=False)
    rep = sim.run_mc(sim.SimConfig(p, "regulated_closed_form", 10**5, seed=1))
    assert abs(rep.mean_avg_price - 0.75) <= 3 * rep.stderr_avg_price


def test_single_replication_flags_stderr():
    rep = sim.run_mc(sim.SimConfig(SET_A, "flexible", 1, seed=0))
    assert rep.stderr_avg_price == 0.0 and not rep.stderr_defined
    assert rep.replications == 1


def test_config_validation():
    with pytest.raises(ValidationError):
        sim.SimConfig(SET_A, "greedy")
    with pytest.raises(ValidationError):
        sim.SimConfig(SET_A, replications=0)
    with pytest.raises(ValidationError):
        sim.SimConfig(SET_A, seed=-1)


def test_worker_count_does_not_change_results():
    config = sim.SimConfig(SET_B, "regulated_closed_form", 3 * sim.CHUNK + 17, seed=9)
    assert sim.run_mc(config, workers=1) == sim.run_mc(config, workers=3)


def test_tabulated_policy_runs():
    rep = sim.run_mc(sim.SimConfig(SET_A, "regulated_tabulated", 50000, seed=4, grid_points=2001))
    assert abs(rep.mean_avg_price - 0.7) < 4 * rep.stderr_avg_price + 2e-3


def test_monte_carlo_matches_enumeration():
    rng = np.random.default_rng(99)
    for i in range(20):
        T = int(rng.integers(2, 13))
        c = rng.uniform(0, 0.5)
        dl = c + rng.uniform(0.3, 1.5)
        dh = dl + rng.uniform(0.1, 2.0) * (dl - c)
        if i % 2:
            p = MarketParams.constant(c, dl, dh, rng.uniform(0.05, 0.95), T, truncated=False)
            policy = cf.t_period_policy(p)
        else:
            p = MarketParams(c, dl, dh, tuple(rng.uniform(0.05, 0.95, T)))
            policy = cf.flexible_policy(p)
        exact = dp.enumerate_expectation(policy, p).expected_avg_price
        rep = sim.run_mc(sim.SimConfig(p, policy.kind, 10**6, seed=i), policy=policy)
        assert abs(rep.mean_avg_price - exact) <= 4 * rep.stderr_avg_price, (i, p)


# --- synthetic archives ---------------------------------------------------------


def test_archive_counts_and_timestamps():
    config = sim.SimConfig(SET_A, "regulated_closed_form", seed=7)
    recs = list(sim.synthesize_archive(config, stations=3, days=4, reform_day=3))
    assert len(recs) == 3 * 4 * 24
    assert recs[0].timestamp == sim.DEFAULT_START
    assert recs[-1].timestamp == sim.DEFAULT_START + timedelta(days=3, hours=23)
    assert {r.station_id for r in recs} == {"s001", "s002", "s003"}


def test_pre_reform_prices_are_static_prices():
    config = sim.SimConfig(SET_B, "regulated_closed_form", seed=5)
    reform = sim.reform_instant(4)
    recs = sim.synthesize_archive(config, stations=5, days=6, reform_day=4)
    assert {r.price for r in recs if r.timestamp < reform} <= {SET_B.p_low, SET_B.p_high}


def test_corner_keeps_p_high_through_low_morning():
    config = sim.SimConfig(SET_B, "regulated_closed_form", seed=5)
    stations, days = 5, 6
    recs = list(sim.synthesize_archive(config, stations=stations, days=days, reform_day=1))
    hits = 0
    for day in range(1, days + 1):
        for s in range(stations):
            rep = (day - 1) * stations + s
            if not sim.draw_demand_path(5, rep, SET_B)[0]:
                start = ((day - 1) * stations + s) * 24
                assert [r.price for r in recs[start : start + 12]] == [2.0] * 12
                hits += 1
    assert hits > 0


def test_noise_is_clipped_and_reproducible():
    config = sim.SimConfig(SET_B, "regulated_closed_form", seed=5)
    a = [r.price for r in sim.synthesize_archive(config, 4, 3, 2, noise_sd=0.01)]
    b = [r.price for r in sim.synthesize_archive(config, 4, 3, 2, noise_sd=0.01)]
    clean = [r.price for r in sim.synthesize_archive(config, 4, 3, 2)]
    assert a == b
    assert max(abs(x - y) for x, y in zip(a, clean)) <= 0.04 + 1e-4


def test_archive_argument_checks():
    config = sim.SimConfig(SET_A, seed=1)
    with pytest.raises(ValidationError):
        list(sim.synthesize_archive(config, 1, 3, 4))
    with pytest.raises(ValidationError):
        list(sim.synthesize_archive(config, 0, 3, 1))
    odd = MarketParams.constant(0.0, 1.0, 2.0, 0.5, 5, truncated=False)
    with pytest.raises(ValidationError):
        list(sim.synthesize_archive(sim.SimConfig(odd, seed=1), 1, 2, 1))


def test_reform_instant():
    assert sim.reform_instant(3, datetime(2026, 1, 30)) == datetime(2026, 2, 1)
