"""Named verification checks run by ``ratchet-pricing verify``.

Each check compares a computed quantity with a target at a stated tolerance.
Checks backed by the grid oracle are retried once on a doubled grid before a
failure is reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import closed_form as cf
from . import dp_oracle as dp
from . import nonlinear as nl
from .model import MarketParams
from .policy import FlexiblePolicy

SET_A = MarketParams(0.0, 1.0, 2.0, (0.3, 0.5))
SET_B = MarketParams(0.0, 1.0, 4.0, (0.3, 0.6))
T_RANGE = range(2, 9)
Q_VALUES = (0.25, 0.5, 0.75)


@dataclass
class CheckResult:
    name: str
    target: float
    computed: float
    tolerance: float
    passed: bool
    mode: str = "abs"  # "abs": |computed - target| <= tol; "le": computed <= target + tol; "info"
    note: str = ""

    def line(self) -> str:
        status = "info" if self.mode == "info" else ("PASS" if self.passed else "FAIL")
        text = (
            f"{status:4s} {self.name}: target={self.target:.12g} computed={self.computed:.12g} "
            f"tolerance={self.tolerance:.3g}"
        )
        return text + (f" ({self.note})" if self.note else "")


@dataclass
class Context:
    grid_points: int = 2001
    oracle_tolerance: float | None = None
    tolerances: dict[str, float] = field(default_factory=dict)


def _judge(name, target, computed, tol, mode="abs", note="") -> CheckResult:
    if mode == "abs":
        ok = abs(computed - target) <= tol
    elif mode == "le":
        ok = computed <= target + tol
    else:
        ok = True
    return CheckResult(name, float(target), float(computed), float(tol), bool(ok), mode, note)


def _grid(params: MarketParams, points: int) -> dp.GridSpec:
    return dp.GridSpec.default(params, points)


# --- closed-form checks -------------------------------------------------------


def lemma1_flexible_closed_form(ctx, tol=1e-12):
    return _judge("lemma1_flexible_closed_form", 0.7, cf.expected_avg_price_flexible(SET_A), tol)


def lemma1_flexible_enumeration(ctx, tol=1e-12):
    rep = dp.enumerate_expectation(FlexiblePolicy(SET_A), SET_A)
    return _judge("lemma1_flexible_enumeration", cf.expected_avg_price_flexible(SET_A), rep.expected_avg_price, tol)


def prop1_interior_policy_closed(ctx, tol=1e-12):
    p1 = cf.two_period_policy(SET_A).low_targets[0]
    return _judge("prop1_interior_policy_closed", 2.0 / 3.0, p1, tol)


def prop2_interior_neutrality_closed(ctx, tol=1e-12):
    return _judge(
        "prop2_interior_neutrality_closed",
        cf.expected_avg_price_flexible(SET_A),
        cf.expected_avg_price_regulated_2p(SET_A),
        tol,
    )


def prop2_corner_increase_closed(ctx, tol=1e-12):
    diff = cf.expected_avg_price_regulated_2p(SET_B) - cf.expected_avg_price_flexible(SET_B)
    return _judge("prop2_corner_increase_closed", 0.525, diff, tol)


def _cs_enumerated(params):
    reg = dp.enumerate_expectation(cf.two_period_policy(params), params)
    flex = dp.enumerate_expectation(FlexiblePolicy(params), params)
    return reg.expected_total_cs - flex.expected_total_cs


def prop3_interior_cs(ctx, tol=1e-12):
    return _judge("prop3_interior_cs", _cs_enumerated(SET_A), cf.expected_cs_diff_2p(SET_A), tol, note="target 0.0875")


def prop3_corner_cs(ctx, tol=1e-12):
    return _judge("prop3_corner_cs", _cs_enumerated(SET_B), cf.expected_cs_diff_2p(SET_B), tol, note="target -0.0875")


def _tperiod_params(T, q):
    return MarketParams.constant(0.0, 1.0, 2.0, q, T, truncated=False)


def tperiod_neutrality(ctx, tol=1e-12):
    worst = 0.0
    for T in T_RANGE:
        for q in Q_VALUES:
            params = _tperiod_params(T, q)
            rep = dp.enumerate_expectation(cf.t_period_policy(params), params)
            target = q * params.p_high + (1 - q) * params.p_low
            worst = max(worst, abs(rep.expected_avg_price - target))
    return _judge("tperiod_neutrality", 0.0, worst, tol, note="max abs error over T=2..8, q in {.25,.5,.75}")


def tperiod_monotone_paths(ctx, tol=0.0):
    violations = 0
    for T in T_RANGE:
        for q in Q_VALUES:
            params = _tperiod_params(T, q)
            _, _, prices = dp.enumerate_paths(cf.t_period_policy(params), params)
            violations += int(np.sum(prices[:, 1:] > prices[:, :-1]))
    return _judge("tperiod_monotone_paths", 0.0, violations, tol, note="count of price increases")


def lemma3_affine_sum(ctx, tol=1e-10):
    worst = 0.0
    for T in T_RANGE:
        for q in Q_VALUES:
            params = _tperiod_params(T, q)
            policy = cf.t_period_policy(params)
            for t in range(1, T + 1):
                lo = cf.t_period_low_target(t, params)
                xs = np.linspace(lo, params.p_high, 3)
                sums = [dp.expected_price_sum_from(policy, params, t, x) for x in xs]
                slope = q * cf.geometric_sum(T - t, q)
                for i in range(2):
                    fd = (sums[i + 1] - sums[i]) / (xs[i + 1] - xs[i])
                    worst = max(worst, abs(fd - slope))
    return _judge("lemma3_affine_sum", 0.0, worst, tol, note="max |secant slope - q S_{T-t}|")


def prop4_neutrality_slice(ctx, tol=1e-12):
    worst = max(abs(nl.delta(nl.NonlinearInstance.make(q / 10, 1.0))) for q in range(1, 10))
    return _judge("prop4_neutrality_slice", 0.0, worst, tol, note="max |Delta(q,1)|, q = 0.1..0.9")


def prop4_formula_vs_enumeration(ctx, tol=1e-10):
    worst = 0.0
    for q in Q_VALUES:
        for a in (0.9, 1.1):
            inst = nl.NonlinearInstance.make(q, a)
            worst = max(worst, abs(nl.delta(inst) - nl.delta_enumerated(inst)))
    return _judge("prop4_formula_vs_enumeration", 0.0, worst, tol)


def prop4_sign_pattern(ctx, tol=0.0):
    """Published sign claim: Delta(q, 0.9) > 0 and Delta(q, 1.1) < 0."""
    wrong = 0
    for q in Q_VALUES:
        for a, sign in ((0.9, 1.0), (1.1, -1.0)):
            inst = nl.NonlinearInstance.make(q, a)
            for value in (nl.delta(inst), nl.delta_enumerated(inst)):
                wrong += int(not sign * value > 0)
    return _judge("prop4_sign_pattern", 0.0, wrong, tol, note="count of cells with the wrong sign (12 evaluated)")


def prop4_slope_report(ctx, tol=0.0):
    rows = nl.slope_audit([0.5])
    r = rows[0]
    return _judge(
        "prop4_slope_report", r["closed"], r["fd"], tol, mode="info", note="q=0.5, FD slope vs published closed form"
    )


# --- oracle checks --------------------------------------------------------------


def _low_price_oracle(params, points, ceiling=np.inf):
    tab = dp.solve_dp(params, _grid(params, points))
    return float(tab.price(1, np.array([ceiling]), np.array([False]))[0]), tab


def prop1_interior_policy_oracle(ctx, points, tol=1e-3):
    p1, _ = _low_price_oracle(SET_A, points)
    return _judge("prop1_interior_policy_oracle", 2.0 / 3.0, p1, tol, note=f"grid {points}")


def prop1_grid_refinement(ctx, points, tol=1e-6):
    err_coarse = abs(_low_price_oracle(SET_A, points)[0] - 2.0 / 3.0)
    err_fine = abs(_low_price_oracle(SET_A, 2 * points - 1)[0] - 2.0 / 3.0)
    ratio = err_fine / err_coarse if err_coarse else 0.0
    return _judge("prop1_grid_refinement", 0.5, ratio, tol, mode="le", note="error ratio fine/coarse")


def prop2_interior_neutrality_oracle(ctx, points, tol=2e-3):
    tab = dp.solve_dp(SET_A, _grid(SET_A, points))
    e = dp.enumerate_expectation(tab, SET_A).expected_avg_price
    return _judge("prop2_interior_neutrality_oracle", 0.7, e, tol, note=f"grid {points}")


def prop2_corner_increase_oracle(ctx, points, tol=2e-3):
    tab = dp.solve_dp(SET_B, _grid(SET_B, points))
    e = dp.enumerate_expectation(tab, SET_B).expected_avg_price
    return _judge("prop2_corner_increase_oracle", 0.525, e - cf.expected_avg_price_flexible(SET_B), tol, note=f"grid {points}")


def tperiod_targets_oracle(ctx, points, tol=None):
    worst, step = 0.0, None
    for T in T_RANGE:
        for q in Q_VALUES:
            params = _tperiod_params(T, q)
            grid = _grid(params, points)
            step = grid.step
            _, _, p_dp = dp.enumerate_paths(dp.solve_dp(params, grid), params)
            _, _, p_cf = dp.enumerate_paths(cf.t_period_policy(params), params)
            worst = max(worst, float(np.max(np.abs(p_dp - p_cf))))
    tol = 2 * step if tol is None else tol
    return _judge("tperiod_targets_oracle", 0.0, worst, tol, note=f"max path-price gap, grid {points}")


def lemma1_marginal_ceiling(ctx, points, tol=0.02):
    params = MarketParams.constant(0.0, 1.0, 2.0, 0.5, 3, truncated=False)
    tab = dp.solve_dp(params, _grid(params, points))
    h = tab.grid.step
    x = tab.prices[1:-1]
    worst = 0.0
    for t in range(1, params.T + 1):
        w = tab.value_function(t)
        fd = (w[2:] - w[:-2]) / (2 * h)
        lo = cf.t_period_low_target(t, params)
        mask = (x > lo + 2 * h) & (x < params.p_high - 0.5 * h)
        exact = np.array([cf.marginal_ceiling_value(t, v, params) for v in x[mask]])
        worst = max(worst, float(np.max(np.abs(fd[mask] - exact) / np.abs(exact))))
    return _judge("lemma1_marginal_ceiling", 0.0, worst, tol, note=f"max relative error, grid step {h:.3g}")


CLOSED_CHECKS: dict[str, Callable] = {
    f.__name__: f
    for f in (
        lemma1_flexible_closed_form,
        lemma1_flexible_enumeration,
        prop1_interior_policy_closed,
        prop2_interior_neutrality_closed,
        prop2_corner_increase_closed,
        prop3_interior_cs,
        prop3_corner_cs,
        tperiod_neutrality,
        tperiod_monotone_paths,
        lemma3_affine_sum,
        prop4_neutrality_slice,
        prop4_formula_vs_enumeration,
        prop4_sign_pattern,
        prop4_slope_report,
    )
}
ORACLE_CHECKS: dict[str, Callable] = {
    f.__name__: f
    for f in (
        prop1_interior_policy_oracle,
        prop1_grid_refinement,
        prop2_interior_neutrality_oracle,
        prop2_corner_increase_oracle,
        tperiod_targets_oracle,
        lemma1_marginal_ceiling,
    )
}
ALL_CHECKS = [*CLOSED_CHECKS, *ORACLE_CHECKS]


def run_check(name: str, ctx: Context) -> CheckResult:
    if name in CLOSED_CHECKS:
        fn = CLOSED_CHECKS[name]
        kwargs = {"tol": ctx.tolerances[name]} if name in ctx.tolerances else {}
        return fn(ctx, **kwargs)
    if name in ORACLE_CHECKS:
        fn = ORACLE_CHECKS[name]
        kwargs = {}
        if name in ctx.tolerances:
            kwargs["tol"] = ctx.tolerances[name]
        elif ctx.oracle_tolerance is not None:
            kwargs["tol"] = ctx.oracle_tolerance
        result = fn(ctx, ctx.grid_points, **kwargs)
        if not result.passed:
            retry = fn(ctx, 2 * ctx.grid_points - 1, **kwargs)
            retry.note = (retry.note + "; " if retry.note else "") + "after grid doubling"
            return retry
        return result
    raise KeyError(f"unknown check {name!r}; known: {', '.join(ALL_CHECKS)}")


def run_checks(names: list[str] | None, ctx: Context) -> list[CheckResult]:
    return [run_check(n, ctx) for n in (names or ALL_CHECKS)]


def all_passed(results: list[CheckResult]) -> bool:
    return all(r.passed for r in results if r.mode != "info")

