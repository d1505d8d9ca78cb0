"""Regulated-vs-flexible price gap under curved demand (d - p)^a.

Two-period results use the first-order condition for the period-1 low-state
price. Longer horizons have no closed form and go through the grid DP.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DomainError, InteriorRegimeError, UnsupportedConfigurationError, ValidationError
from .formatting import fmt as _fmt
from .model import MarketParams, static_monopoly_price
from .policy import FlexiblePolicy, RegulatedClosedFormPolicy

CANONICAL_D_HIGH = 1.0
CANONICAL_D_LOW = 0.5
BISECTION_TOL = 1e-12
# Offset from the bracket ends when checking the sign of the FOC.
BRACKET_EPS = 1e-12


@dataclass(frozen=True)
class NonlinearInstance:
    q: float
    a: float
    params: MarketParams

    @classmethod
    def make(cls, q: float, a: float, d_high: float = CANONICAL_D_HIGH, d_low: float = CANONICAL_D_LOW):
        params = MarketParams(0.0, d_low, d_high, (q, q), 2, True, a)
        return cls(q, a, params)

    @property
    def p_high(self) -> float:
        return float(static_monopoly_price(self.params.d_high, self.params))

    @property
    def p_low(self) -> float:
        return float(static_monopoly_price(self.params.d_low, self.params))

    @property
    def bracket(self) -> tuple[float, float]:
        return self.p_low, min(self.params.d_low, self.p_high)

    @property
    def canonical(self) -> bool:
        return self.params.d_high == CANONICAL_D_HIGH and self.params.d_low == CANONICAL_D_LOW


def _instance(params: MarketParams) -> NonlinearInstance:
    if params.T != 2 or not params.constant_q or params.c != 0 or not params.truncated:
        raise UnsupportedConfigurationError("nonlinear two-period analysis needs T=2, constant q, c=0")
    return NonlinearInstance(params.q, params.exponent_a, params)


def foc_residual(p: float, inst: NonlinearInstance) -> float:
    """F(p) = q (d_H - p)^(a-1) (p_H - p) - (d_L - p)^(a-1) (p - p_L)."""
    dh, dl, a = inst.params.d_high, inst.params.d_low, inst.a
    if p >= dl:
        raise DomainError(f"p = {p} must be below d_low = {dl}")
    return inst.q * (dh - p) ** (a - 1.0) * (inst.p_high - p) - (dl - p) ** (a - 1.0) * (p - inst.p_low)


def solve_p1_low(inst: NonlinearInstance, tol: float = BISECTION_TOL) -> float:
    """Root of the FOC in (p_L, min(d_L, p_H)) by bisection."""
    lo, hi = inst.bracket
    if not lo < hi:
        raise InteriorRegimeError(f"empty bracket ({lo}, {hi}) for q={inst.q}, a={inst.a}")
    f_lo = foc_residual(lo + BRACKET_EPS, inst)
    f_hi = foc_residual(hi - BRACKET_EPS, inst)
    if not f_lo > 0:
        raise InteriorRegimeError(f"interior regime violated: F(p_L + eps) = {f_lo} is not positive")
    if not f_hi < 0:
        raise InteriorRegimeError(
            f"interior regime violated: F(min(d_L, p_H) - eps) = {f_hi} is not negative"
        )
    a, b = lo + BRACKET_EPS, hi - BRACKET_EPS
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = foc_residual(m, inst)
        if fm == 0.0:
            return m
        if fm > 0:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def nonlinear_policy(params: MarketParams) -> RegulatedClosedFormPolicy:
    """Two-period regulated policy: p_H when high, FOC root when low, then p_L."""
    inst = _instance(params)
    return RegulatedClosedFormPolicy(inst.p_high, (solve_p1_low(inst), inst.p_low))


def delta(inst: NonlinearInstance) -> float:
    """Regulated minus flexible expected average price, ((1-q)/2)[(1+q) p1L - q p_H - p_L]."""
    q = inst.q
    p1 = solve_p1_low(inst)
    return 0.5 * (1.0 - q) * ((1.0 + q) * p1 - q * inst.p_high - inst.p_low)


def delta_enumerated(inst: NonlinearInstance) -> float:
    """The same gap by exact path enumeration of both policies."""
    from .dp_oracle import enumerate_expectation

    reg = enumerate_expectation(nonlinear_policy(inst.params), inst.params)
    flex = enumerate_expectation(FlexiblePolicy(inst.params), inst.params)
    return reg.expected_avg_price - flex.expected_avg_price


def delta_slope_fd(q: float, h: float = 1e-3) -> float:
    """Central difference (Delta(q, 1+h) - Delta(q, 1-h)) / 2h on the canonical instance."""
    if not 0 < h <= 0.1:
        raise DomainError(f"h must lie in (0, 0.1], got {h}")
    up = delta(NonlinearInstance.make(q, 1.0 + h))
    down = delta(NonlinearInstance.make(q, 1.0 - h))
    return (up - down) / (2.0 * h)


def delta_slope_closed(q: float) -> float:
    """Published closed form for dDelta/da at a = 1: q(q-1) ln(2q+3) / (8(1+q))."""
    if not 0 < q < 1:
        raise DomainError(f"q must lie in (0, 1), got {q}")
    return q * (q - 1.0) * math.log(2.0 * q + 3.0) / (8.0 * (1.0 + q))


def slope_audit(q_values: Sequence[float], h: float = 1e-3) -> list[dict]:
    """FD slope (h and h/2) next to the published closed form."""
    rows = []
    for q in q_values:
        fd = delta_slope_fd(q, h)
        fd_half = delta_slope_fd(q, h / 2)
        closed = delta_slope_closed(q)
        rows.append(
            {"q": q, "fd": fd, "fd_half": fd_half, "closed": closed, "discrepancy": fd - closed}
        )
    return rows


@dataclass(frozen=True)
class SweepRow:
    q: float
    a: float
    delta: float | None
    status: str


def delta_multi_period(
    q: float,
    a: float,
    T: int,
    grid_points: int = 2001,
    d_high: float = CANONICAL_D_HIGH,
    d_low: float = CANONICAL_D_LOW,
    replications: int | None = None,
    seed: int = 0,
) -> float:
    """Approximate gap for T periods using the grid-DP policy.

    With ``replications`` set, the regulated average comes from Monte Carlo;
    otherwise from exact enumeration. The flexible benchmark is exact.
    """
    from .dp_oracle import GridSpec, enumerate_expectation, solve_dp

    params = MarketParams.constant(0.0, d_low, d_high, q, T, True, a)
    policy = solve_dp(params, GridSpec(0.0, d_high, grid_points))
    flex = q * params.p_high + (1.0 - q) * params.p_low
    if replications is None:
        reg = enumerate_expectation(policy, params).expected_avg_price
    else:
        from .sim import SimConfig, run_mc

        reg = run_mc(SimConfig(params, "regulated_tabulated", replications, seed), policy=policy).mean_avg_price
    return reg - flex


def _sweep_cell(args) -> SweepRow:
    q, a, T, d_high, d_low, grid_points = args
    try:
        if T == 2:
            value = delta(NonlinearInstance.make(q, a, d_high, d_low))
        else:
            value = delta_multi_period(q, a, T, grid_points, d_high, d_low)
    except (InteriorRegimeError, ValidationError):
        return SweepRow(q, a, None, "infeasible")
    return SweepRow(q, a, value, "ok")


def sweep_delta(
    q_grid: Iterable[float],
    a_grid: Iterable[float],
    T: int = 2,
    d_high: float = CANONICAL_D_HIGH,
    d_low: float = CANONICAL_D_LOW,
    grid_points: int = 2001,
    workers: int = 1,
) -> list[SweepRow]:
    """Delta over a (q, a) grid in lexicographic order; infeasible cells are marked, not dropped."""
    cells = [(q, a, T, d_high, d_low, grid_points) for q in sorted(q_grid) for a in sorted(a_grid)]
    if workers > 1 and len(cells) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_cell, cells))
    return [_sweep_cell(c) for c in cells]


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["q", "a", "delta", "status"])
    for r in rows:
        w.writerow([_fmt(r.q), _fmt(r.a), "" if r.delta is None else _fmt(r.delta), r.status])
    return buf.getvalue()


def static_price_numeric(d: float, a: float, tol: float = 1e-12) -> float:
    """Golden-section maximiser of p (d - p)^a on [0, d]; cross-checks d/(1+a)."""
    from .dp_oracle import golden_section_max

    return golden_section_max(lambda p: p * max(d - p, 0.0) ** a, 0.0, d, tol)[0]


__all__ = [
    "NonlinearInstance",
    "SweepRow",
    "delta",
    "delta_enumerated",
    "delta_multi_period",
    "delta_slope_closed",
    "delta_slope_fd",
    "foc_residual",
    "nonlinear_policy",
    "slope_audit",
    "solve_p1_low",
    "static_price_numeric",
    "sweep_delta",
    "sweep_to_csv",
]
