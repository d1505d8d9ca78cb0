import math

import numpy as np
import pytest

from ratchet_pricing import MarketParams
from ratchet_pricing import closed_form as cf
from ratchet_pricing import dp_oracle as dp
from ratchet_pricing.errors import ValidationError
from ratchet_pricing.policy import FlexiblePolicy

SET_A = MarketParams(0.0, 1.0, 2.0, (0.3, 0.5))
SET_B = MarketParams(0.0, 1.0, 4.0, (0.3, 0.6))
T3 = MarketParams.constant(0.0, 1.0, 2.0, 0.5, 3, truncated=False)


def low_price(policy, t=1, ceiling=math.inf):
    return float(policy.price(t, np.array([ceiling]), np.array([False]))[0])


def test_set_a_period1_low_price():
    tab = dp.solve_dp(SET_A, dp.GridSpec(0.0, 2.0, 2001))
    assert abs(low_price(tab) - 2 / 3) <= 1e-3


def test_set_b_corner_price():
    tab = dp.solve_dp(SET_B, dp.GridSpec(0.0, 4.0, 4001))
    assert abs(low_price(tab) - 2.0) <= 1e-3


def test_t3_period2_target():
    tab = dp.solve_dp(T3, dp.GridSpec(0.0, 2.0, 2001))
    assert abs(low_price(tab, t=2, ceiling=T3.p_high) - 2 / 3) <= 1e-3


def test_grid_refinement_halves_error():
    errs = [abs(low_price(dp.solve_dp(SET_A, dp.GridSpec(0.0, 2.0, n))) - 2 / 3) for n in (2001, 4001)]
    assert errs[1] <= 0.5 * errs[0] * (1 + 1e-6)


def test_enumeration_examples():
    assert dp.enumerate_expectation(FlexiblePolicy(SET_A), SET_A).expected_avg_price == pytest.approx(0.7, abs=1e-12)
    rep = dp.enumerate_expectation(cf.t_period_policy(T3), T3)
    assert rep.expected_avg_price == pytest.approx(0.75, abs=1e-12)
    assert rep.path_count == 8
    assert dp.enumerate_expectation(cf.two_period_policy(SET_B), SET_B).expected_avg_price == pytest.approx(1.7, abs=1e-12)


def test_enumeration_refuses_long_horizons():
    p = MarketParams.constant(0.0, 1.0, 2.0, 0.5, 21, truncated=False)
    with pytest.raises(ValidationError):
        dp.enumerate_expectation(cf.t_period_policy(p), p)


def test_all_paths_order():
    paths = dp.all_paths(3)
    assert paths.shape == (8, 3)
    assert paths[1].tolist() == [False, False, True]
    assert paths[4].tolist() == [True, False, False]
    probs = dp.path_probabilities(paths, (0.2, 0.5, 0.7))
    assert math.fsum(probs) == pytest.approx(1.0, abs=1e-15)


def test_golden_section_examples():
    assert dp.golden_section_max(lambda p: p * (1 - p), 0, 1, 1e-10)[0] == pytest.approx(0.5, abs=1e-8)
    assert dp.golden_section_max(lambda p: (p - 0.2) * (1.4 - p), 0, 1.4, 1e-10)[0] == pytest.approx(0.8, abs=1e-8)
    assert dp.golden_section_max(lambda p: p * (1 - p) ** 3, 0, 1, 1e-10)[0] == pytest.approx(0.25, abs=1e-8)
    # monotone objective: the endpoint wins
    assert dp.golden_section_max(lambda p: p, 0, 1)[0] == 1.0
    with pytest.raises(ValidationError):
        dp.golden_section_max(lambda p: p, 1, 0)


def test_grid_validation():
    with pytest.raises(ValidationError):
        dp.solve_dp(SET_A, dp.GridSpec(0.0, 1.5, 2001))
    with pytest.raises(ValidationError):
        dp.solve_dp(SET_A, dp.GridSpec(0.0, 2.0, 101))
    tab = dp.solve_dp(SET_A, dp.GridSpec(0.0, 2.0, 2001))
    with pytest.raises(ValidationError):
        tab.price(2, np.array([0.12345]), np.array([False]))


def test_ties_resolve_to_highest_price():
    # truncated low-state profit is flat (zero) above d_L; that zone must never be picked
    tab = dp.solve_dp(SET_B, dp.GridSpec.default(SET_B, 2001))
    assert np.all(tab.prices[tab.choice] <= SET_B.p_high + 1e-12)
    assert dp._best_below(np.array([1.0, 3.0, 3.0, 2.0, 3.0])).tolist() == [0, 1, 2, 2, 4]


def test_value_function_slope_above_targets():
    tab = dp.solve_dp(T3, dp.GridSpec(0.0, 2.0, 2001))
    h = tab.grid.step
    x = tab.prices[1:-1]
    for t in (1, 2, 3):
        w = tab.value_function(t)
        fd = (w[2:] - w[:-2]) / (2 * h)
        mask = (x > cf.t_period_low_target(t, T3) + 2 * h) & (x < T3.p_high - h)
        exact = np.array([cf.marginal_ceiling_value(t, v, T3) for v in x[mask]])
        assert np.max(np.abs(fd[mask] - exact)) <= 4 * h


def test_value_function_slope_is_steeper_below_target():
    # below the period's target the low-state choice is capped, so the ceiling is worth more
    tab = dp.solve_dp(T3, dp.GridSpec(0.0, 2.0, 2001))
    h = tab.grid.step
    w = tab.value_function(1)
    i = int(round(0.6 / h))
    fd = (w[i + 1] - w[i - 1]) / (2 * h)
    assert fd > cf.marginal_ceiling_value(1, 0.6, T3) + 0.01


# --- randomized agreement -----------------------------------------------------


def _draw(rng):
    """A parameter set with a closed form: two-period truncated, or T-period untruncated."""
    c = rng.uniform(0.0, 0.5)
    dl = c + rng.uniform(0.3, 1.5)
    if rng.random() < 0.5:
        dh = dl + rng.uniform(0.1, 4.0) * (dl - c)
        return MarketParams(c, dl, dh, tuple(rng.uniform(0.05, 0.95, 2)))
    dh = dl + rng.uniform(0.1, 2.0) * (dl - c)
    return MarketParams.constant(c, dl, dh, rng.uniform(0.05, 0.95), int(rng.integers(2, 6)), truncated=False)


def _agrees_with_profit_comparison(p):
    gap = cf.corner_profit_gap(p)
    if abs(gap) < 1e-4:
        return False  # near-ties can flip on the grid
    return (gap > 0) == (cf.regime_classify(p) is cf.Regime.CORNER)


def test_oracle_matches_closed_form_on_random_draws():
    rng = np.random.default_rng(20260318)
    checked = regimes = 0
    seen = set()
    while checked < 200:
        p = _draw(rng)
        if p.truncated:
            if not _agrees_with_profit_comparison(p):
                continue
            seen.add(cf.regime_classify(p))
        closed = cf.regulated_policy(p)
        tab = dp.solve_dp(p, dp.GridSpec.default(p, 2001))
        step = tab.grid.step
        _, _, p_cf = dp.enumerate_paths(closed, p)
        _, _, p_dp = dp.enumerate_paths(tab, p)
        assert np.max(np.abs(p_cf - p_dp)) <= 2 * step, p
        e_cf = dp.enumerate_expectation(closed, p).expected_avg_price
        e_dp = dp.enumerate_expectation(tab, p).expected_avg_price
        assert abs(e_cf - e_dp) <= 4 * step, p
        checked += 1
    assert seen == {cf.Regime.INTERIOR, cf.Regime.CORNER}


def test_regulated_paths_weakly_decrease():
    rng = np.random.default_rng(7)
    for _ in range(30):
        p = _draw(rng)
        tab = dp.solve_dp(p, dp.GridSpec.default(p, 501))
        _, _, prices = dp.enumerate_paths(tab, p)
        assert np.all(np.diff(prices, axis=1) <= 1e-12)


def test_affine_price_sum():
    for q in (0.25, 0.5, 0.75):
        p = MarketParams.constant(0.0, 1.0, 2.0, q, 5, truncated=False)
        policy = cf.t_period_policy(p)
        for t in range(1, 5):
            lo = policy.low_targets[t - 1]
            xs = np.linspace(lo, p.p_high, 5)[1:4]
            ys = [dp.expected_price_sum_from(policy, p, t, x) for x in xs]
            slope = q * cf.geometric_sum(p.T - t, q)
            assert (ys[1] - ys[0]) / (xs[1] - xs[0]) == pytest.approx(slope, abs=1e-10)
            assert (ys[2] - ys[1]) / (xs[2] - xs[1]) == pytest.approx(slope, abs=1e-10)
