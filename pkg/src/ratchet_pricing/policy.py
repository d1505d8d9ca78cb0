"""Pricing rules and path roll-out with ceiling threading.

A policy maps (period t, ceiling x, demand state) to a price. Period indices
are 1-based; the period-1 ceiling is ``inf`` (unconstrained). Every policy
evaluates whole batches of paths at once: ``ceiling`` and ``high`` are arrays
of equal shape.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .model import MarketParams, cs, profit, static_monopoly_price


class Policy:
    kind = "abstract"

    def price(self, t: int, ceiling: np.ndarray, high: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class FlexiblePolicy(Policy):
    """Static monopoly price of the realised state; ignores the ceiling."""

    kind = "flexible"

    def __init__(self, params: MarketParams):
        self.p_high = float(static_monopoly_price(params.d_high, params))
        self.p_low = float(static_monopoly_price(params.d_low, params))

    def price(self, t, ceiling, high):
        return np.where(high, self.p_high, self.p_low)


class RegulatedClosedFormPolicy(Policy):
    """Keep the ceiling (capped at p_high) when demand is high, cut to a
    period-specific target when demand is low.

    ``low_targets[t-1]`` is the low-state target of period t. Prices never
    exceed the inherited ceiling.
    """

    kind = "regulated_closed_form"

    def __init__(self, p_high: float, low_targets: Sequence[float]):
        self.p_high = float(p_high)
        self.low_targets = tuple(float(v) for v in low_targets)

    def price(self, t, ceiling, high):
        ceiling = np.asarray(ceiling, dtype=float)
        target = np.where(high, self.p_high, self.low_targets[t - 1])
        return np.minimum(ceiling, target)

    def __repr__(self):
        return f"RegulatedClosedFormPolicy(p_high={self.p_high!r}, low_targets={self.low_targets!r})"


def roll_out(policy: Policy, highs: np.ndarray, start_period: int = 1, ceiling=np.inf) -> np.ndarray:
    """Price matrix for a batch of demand paths.

    ``highs`` has shape (n_paths, n_periods); column j is period
    ``start_period + j``. ``ceiling`` is the ceiling entering the first
    simulated period (scalar or per-path array).
    """
    highs = np.atleast_2d(np.asarray(highs, dtype=bool))
    n, k = highs.shape
    x = np.broadcast_to(np.asarray(ceiling, dtype=float), (n,)).copy()
    prices = np.empty((n, k))
    for j in range(k):
        p = policy.price(start_period + j, x, highs[:, j])
        prices[:, j] = p
        x = p
    return prices


def path_totals(prices: np.ndarray, highs: np.ndarray, params: MarketParams):
    """Per-path (average price, total profit, total surplus or None)."""
    d = np.where(highs, params.d_high, params.d_low)
    avg = prices.mean(axis=1)
    tot_profit = profit(prices, d, params).sum(axis=1)
    tot_cs = cs(prices, d, params).sum(axis=1) if params.linear else None
    return avg, tot_profit, tot_cs
