import math

import numpy as np
import pytest

from ratchet_pricing import MarketParams
from ratchet_pricing import dp_oracle as dp
from ratchet_pricing import nonlinear as nl
from ratchet_pricing.errors import DomainError, InteriorRegimeError, UnsupportedConfigurationError

Q_VALUES = (0.25, 0.5, 0.75)


def inst(q=0.5, a=1.0):
    return nl.NonlinearInstance.make(q, a)


def test_foc_residual_examples():
    assert nl.foc_residual(1 / 3, inst()) == pytest.approx(0.0, abs=1e-15)
    # at p_L the second term vanishes, leaving q (p_H - p_L) = 0.5 * 0.25
    assert nl.foc_residual(0.25, inst()) == pytest.approx(0.125, abs=1e-15)
    assert nl.foc_residual(0.45, inst()) < 0
    with pytest.raises(DomainError):
        nl.foc_residual(0.5, inst())


def test_solve_p1_low_examples():
    assert nl.solve_p1_low(inst(0.5)) == pytest.approx(1 / 3, abs=1e-12)
    assert nl.solve_p1_low(inst(0.25)) == pytest.approx(0.3, abs=1e-12)
    i = inst(0.5, 1.2)
    root = nl.solve_p1_low(i)
    assert i.p_low < root < 0.5
    assert abs(nl.foc_residual(root, i)) < 1e-12


def test_a_equal_one_matches_linear_formula():
    rng = np.random.default_rng(3)
    for q in rng.uniform(0.01, 0.99, 100):
        i = inst(q)
        assert nl.solve_p1_low(i) == pytest.approx((i.p_low + q * i.p_high) / (1 + q), abs=1e-12)


def test_bisection_residual_over_grid():
    for q in np.linspace(0.05, 0.95, 19):
        for a in np.linspace(0.5, 2.0, 16):
            i = inst(q, a)
            try:
                root = nl.solve_p1_low(i)
            except InteriorRegimeError:
                continue
            assert abs(nl.foc_residual(root, i)) < 1e-10


def test_delta_neutral_at_a_one():
    for q in np.linspace(0.1, 0.9, 9):
        assert abs(nl.delta(inst(q))) < 1e-12


def test_delta_formula_matches_enumeration():
    for q in Q_VALUES:
        for a in (0.8, 0.9, 1.0, 1.1, 1.2):
            i = inst(q, a)
            assert nl.delta(i) == pytest.approx(nl.delta_enumerated(i), abs=1e-10)


@pytest.mark.parametrize("q", Q_VALUES)
def test_delta_sign_matches_independent_grid_search(q):
    # Brute force: fine-grid DP over all prices in [0, d_H], no first-order conditions.
    # It puts Delta below zero for a < 1 and above zero for a > 1.
    for a in (0.8, 0.9, 1.1, 1.2):
        i = inst(q, a)
        tab = dp.solve_dp(i.params, dp.GridSpec(0.0, 1.0, 20001))
        reg = dp.enumerate_expectation(tab, i.params).expected_avg_price
        flex = q * i.p_high + (1 - q) * i.p_low
        brute = reg - flex
        assert nl.delta(i) == pytest.approx(brute, abs=1e-4)
        assert np.sign(brute) == np.sign(a - 1)


def test_fd_slope_positive_and_second_order():
    fd = nl.delta_slope_fd(0.5, 1e-3)
    fd_half = nl.delta_slope_fd(0.5, 5e-4)
    fd_double = nl.delta_slope_fd(0.5, 2e-3)
    assert math.isfinite(fd) and fd > 0
    ratio = abs(fd_double - fd) / abs(fd - fd_half)
    assert 3.0 < ratio < 5.0


def test_fd_slope_equals_minus_published_value():
    # the published expression has the right magnitude but the opposite sign
    for q in np.linspace(0.1, 0.9, 9):
        assert nl.delta_slope_fd(q) == pytest.approx(-nl.delta_slope_closed(q), rel=1e-5)


def test_slope_closed_examples():
    assert nl.delta_slope_closed(0.5) == pytest.approx(0.5 * -0.5 * math.log(4) / 12, rel=1e-15)
    assert abs(nl.delta_slope_closed(1e-9)) < 1e-9
    assert abs(nl.delta_slope_closed(1 - 1e-9)) < 1e-9
    with pytest.raises(DomainError):
        nl.delta_slope_closed(1.0)


def test_slope_audit_rows():
    rows = nl.slope_audit([0.1, 0.5, 0.9])
    assert [r["q"] for r in rows] == [0.1, 0.5, 0.9]
    for r in rows:
        assert r["discrepancy"] == pytest.approx(r["fd"] - r["closed"])
        assert abs(r["fd"] - r["fd_half"]) < 1e-6


def test_sweep_order_and_neutral_column():
    rows = nl.sweep_delta([0.75, 0.25, 0.5], [1.2, 1.0, 0.8])
    assert [(r.q, r.a) for r in rows] == [(q, a) for q in Q_VALUES for a in (0.8, 1.0, 1.2)]
    assert all(r.status == "ok" for r in rows)
    assert all(abs(r.delta) < 1e-12 for r in rows if r.a == 1.0)
    for r in rows:
        if r.a != 1.0:
            assert np.sign(r.delta) == np.sign(r.a - 1)


def test_sweep_marks_infeasible_cells():
    rows = nl.sweep_delta([0.5], [1.0, 2.0], d_low=0.1)
    assert [r.status for r in rows] == ["infeasible", "infeasible"]
    assert all(r.delta is None for r in rows)
    csv_text = nl.sweep_to_csv(rows)
    assert csv_text.splitlines() == ["q,a,delta,status", "0.5,1,,infeasible", "0.5,2,,infeasible"]


def test_sweep_empty_grid():
    assert nl.sweep_delta([], [1.0]) == []
    assert nl.sweep_to_csv([]) == "q,a,delta,status\n"


def test_delta_vanishes_as_q_goes_to_zero():
    for a in (0.8, 1.2):
        vals = [abs(nl.delta(inst(q, a))) for q in (1e-2, 1e-3, 1e-4)]
        assert vals[0] > vals[1] > vals[2]
        assert vals[2] < 1e-5


def test_sweep_is_worker_independent():
    one = nl.sweep_to_csv(nl.sweep_delta(Q_VALUES, (0.9, 1.1), workers=1))
    two = nl.sweep_to_csv(nl.sweep_delta(Q_VALUES, (0.9, 1.1), workers=2))
    assert one == two


def test_multi_period_gap_sign():
    for a in (0.9, 1.1):
        value = nl.delta_multi_period(0.5, a, 5, grid_points=2001)
        assert np.sign(value) == np.sign(a - 1)
    mc = nl.delta_multi_period(0.5, 1.1, 5, grid_points=2001, replications=20000, seed=3)
    assert math.isfinite(mc)


def test_static_price_numeric():
    for a in (0.5, 1.0, 3.0):
        assert nl.static_price_numeric(1.0, a) == pytest.approx(1 / (1 + a), abs=1e-8)


def test_nonlinear_requires_zero_cost_two_periods():
    params = MarketParams.constant(0.0, 0.5, 1.0, 0.5, 3, exponent_a=1.2)
    with pytest.raises(UnsupportedConfigurationError):
        nl.nonlinear_policy(params)
