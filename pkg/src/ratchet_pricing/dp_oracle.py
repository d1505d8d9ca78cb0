"""Brute-force reference solutions.

``solve_dp`` runs backward induction over a uniform price grid; ceilings live
on the same grid, so the state space is exactly the grid and no interpolation
is needed. ``enumerate_expectation`` computes exact expectations by visiting
all 2^T demand paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ValidationError
from .model import MarketParams, profit
from .policy import Policy, path_totals, roll_out

MAX_ENUMERATION_T = 20
# Relative tolerance under which two objective values count as a tie.
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    lo: float
    hi: float
    points: int

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValidationError(f"grid needs lo < hi, got [{self.lo}, {self.hi}]")
        if int(self.points) != self.points or self.points < 2:
            raise ValidationError(f"grid needs at least 2 points, got {self.points}")

    @classmethod
    def default(cls, params: MarketParams, points: int = 2001) -> "GridSpec":
        return cls(params.c, params.d_high, points)

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.points - 1)

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.points)


class TabulatedPolicy(Policy):
    """Grid policy produced by :func:`solve_dp`.

    ``choice[t-1, s, i]`` is the grid index chosen in period t, state s
    (0 = low, 1 = high), with ceiling at grid index i. ``values[t-1, i]`` is
    the ex-ante continuation value W_t at ceiling grid index i; the last row
    is W_{T+1} = 0.
    """

    kind = "regulated_tabulated"

    def __init__(self, grid: GridSpec, choice: np.ndarray, values: np.ndarray):
        self.grid = grid
        self.prices = grid.values
        self.choice = choice
        self.values = values

    @property
    def T(self) -> int:
        return self.choice.shape[0]

    def ceiling_index(self, ceiling) -> np.ndarray:
        ceiling = np.asarray(ceiling, dtype=float)
        top = self.grid.points - 1
        pos = (np.minimum(ceiling, self.grid.hi) - self.grid.lo) / self.grid.step
        idx = np.rint(pos)
        finite = np.isfinite(ceiling)
        if np.any(finite & (np.abs(pos - idx) > 1e-6)):
            raise ValidationError("ceiling is not a grid point")
        if np.any(idx < 0):
            raise ValidationError("ceiling below the grid")
        return np.where(finite, idx, top).astype(np.int64)

    def price(self, t, ceiling, high):
        i = self.ceiling_index(ceiling)
        s = np.asarray(high, dtype=np.int64)
        return self.prices[self.choice[t - 1, s, i]]

    def value_function(self, t: int) -> np.ndarray:
        """W_t on the grid (t = T + 1 gives zeros)."""
        return self.values[t - 1]


def _best_below(obj: np.ndarray) -> np.ndarray:
    """For each i, the highest index j <= i attaining max(obj[:i+1]) up to a tie tolerance."""
    running = np.maximum.accumulate(obj)
    with np.errstate(invalid="ignore"):
        tol = TIE_RTOL * np.maximum(1.0, np.abs(running))
    leader = obj >= running - tol
    idx = np.where(leader, np.arange(obj.size), 0)
    return np.maximum.accumulate(idx)


def solve_dp(params: MarketParams, grid: GridSpec | None = None) -> TabulatedPolicy:
    """Backward induction on the price grid.

    For each period t = T..1 and grid ceiling x, the chosen price maximises
    profit(p, d) + W_{t+1}(p) over grid prices p <= x, ties going to the
    highest price. Period 1 searches the full grid up to p_H (see below).
    """
    grid = grid or GridSpec.default(params)
    span = max(1.0, abs(params.d_high))
    if grid.lo > params.c + 1e-12 * span or grid.hi < params.d_high - 1e-12 * span:
        raise ValidationError(
            f"grid [{grid.lo}, {grid.hi}] does not cover [c, d_high] = [{params.c}, {params.d_high}]"
        )
    if grid.points < 201:
        raise ValidationError(f"solve_dp needs at least 201 grid points, got {grid.points}")
    P = grid.values
    if np.any(P < 0):
        raise ValidationError("grid contains negative prices")
    T = params.T
    choice = np.empty((T, 2, grid.points), dtype=np.int64)
    values = np.zeros((T + 1, grid.points))
    # Prices above p_H are weakly dominated: current profit does not rise
    # there and continuation values are flat. Excluding them keeps the
    # highest-price tie-break from drifting into the flat zero-profit zone.
    excluded = P > params.p_high + 1e-9 * grid.step
    current = {
        0: np.where(excluded, -np.inf, profit(P, params.d_low, params)),
        1: np.where(excluded, -np.inf, profit(P, params.d_high, params)),
    }
    for t in range(T, 0, -1):
        w_next = values[t]
        branch = []
        for s in (0, 1):
            obj = current[s] + w_next
            best = _best_below(obj)
            choice[t - 1, s] = best
            branch.append(obj[best])
        g = params.gammas[t - 1]
        values[t - 1] = g * branch[1] + (1.0 - g) * branch[0]
    return TabulatedPolicy(grid, choice, values)


@dataclass(frozen=True)
class ExpectationReport:
    expected_avg_price: float
    expected_total_profit: float
    expected_total_cs: float | None
    per_period_expected_price: tuple[float, ...]
    path_count: int


def all_paths(n: int) -> np.ndarray:
    """Every high/low path of length n; row k encodes k in binary, period 1 most significant."""
    k = np.arange(2**n, dtype=np.int64)[:, None]
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)[None, :]
    return ((k >> shifts) & 1).astype(bool)


def path_probabilities(highs: np.ndarray, gammas) -> np.ndarray:
    g = np.asarray(gammas, dtype=float)[None, :]
    return np.prod(np.where(highs, g, 1.0 - g), axis=1)


def _check_horizon(T: int) -> None:
    if T > MAX_ENUMERATION_T:
        raise ValidationError(f"exact enumeration refuses T={T} > {MAX_ENUMERATION_T}; use Monte Carlo")


def enumerate_expectation(policy: Policy, params: MarketParams) -> ExpectationReport:
    _check_horizon(params.T)
    highs = all_paths(params.T)
    probs = path_probabilities(highs, params.gammas)
    total = math.fsum(probs)
    if abs(total - 1.0) > 1e-12:
        raise AssertionError(f"path probabilities sum to {total}")
    prices = roll_out(policy, highs)
    avg, tot_profit, tot_cs = path_totals(prices, highs, params)
    return ExpectationReport(
        expected_avg_price=float(probs @ avg),
        expected_total_profit=float(probs @ tot_profit),
        expected_total_cs=None if tot_cs is None else float(probs @ tot_cs),
        per_period_expected_price=tuple(float(v) for v in probs @ prices),
        path_count=highs.shape[0],
    )


def enumerate_paths(policy: Policy, params: MarketParams):
    """(demand paths, probabilities, price matrix) for every path; handy for path-wise checks."""
    _check_horizon(params.T)
    highs = all_paths(params.T)
    return highs, path_probabilities(highs, params.gammas), roll_out(policy, highs)


def expected_price_sum_from(policy: Policy, params: MarketParams, t: int, ceiling: float) -> float:
    """E[p_t + ... + p_T | x_t = ceiling] by enumerating the remaining periods."""
    _check_horizon(params.T - t + 1)
    highs = all_paths(params.T - t + 1)
    probs = path_probabilities(highs, params.gammas[t - 1 :])
    prices = roll_out(policy, highs, start_period=t, ceiling=ceiling)
    return float(probs @ prices.sum(axis=1))


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(
    objective: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10
) -> tuple[float, float]:
    """Maximise a unimodal function on [lo, hi]; returns (argmax, max)."""
    if not lo < hi:
        raise ValidationError(f"need lo < hi, got [{lo}, {hi}]")
    if tol <= 0:
        raise ValidationError("tol must be positive")
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = objective(c), objective(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = objective(d)
    x = 0.5 * (a + b)
    candidates = [(objective(x), x), (objective(lo), lo), (objective(hi), hi)]
    fx, x = max(candidates)
    return x, fx
