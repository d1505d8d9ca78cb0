"""Economic environment: two-state demand, profit, consumer surplus, static prices.

All functions accept scalars or numpy arrays for the price argument and
broadcast like numpy ufuncs.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import UnsupportedConfigurationError, ValidationError

# Type alias: a demand path is a boolean vector of length T, True = high state.
DemandPath = np.ndarray


@dataclass(frozen=True)
class MarketParams:
    """Market environment for one trading day.

    ``gammas[t-1]`` is the probability of the high-demand state in period t.
    ``truncated`` selects q = max(d - p, 0) (two-period model) versus q = d - p.
    ``exponent_a`` is the demand curvature, quantity = (d - p)^a.
    """

    c: float
    d_low: float
    d_high: float
    gammas: tuple[float, ...]
    T: int | None = None
    truncated: bool = True
    exponent_a: float = 1.0

    def __post_init__(self) -> None:
        gammas = tuple(float(g) for g in self.gammas)
        object.__setattr__(self, "gammas", gammas)
        if self.T is None:
            object.__setattr__(self, "T", len(gammas))
        for name in ("c", "d_low", "d_high", "exponent_a"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValidationError(f"{name} must be finite, got {v!r}")
        if int(self.T) != self.T or self.T < 2:
            raise ValidationError(f"T must be an integer >= 2, got {self.T!r}")
        object.__setattr__(self, "T", int(self.T))
        if len(gammas) != self.T:
            raise ValidationError(f"gammas has length {len(gammas)}, expected T={self.T}")
        if self.c < 0:
            raise ValidationError(f"c must be >= 0, got {self.c}")
        if not (self.d_high > self.d_low > self.c):
            raise ValidationError(
                f"need d_high > d_low > c, got d_high={self.d_high}, d_low={self.d_low}, c={self.c}"
            )
        for t, g in enumerate(gammas, start=1):
            if not (0.0 < g < 1.0):
                raise ValidationError(f"gammas[{t}] must lie strictly inside (0, 1), got {g}")
        if self.exponent_a <= 0:
            raise ValidationError(f"exponent_a must be > 0, got {self.exponent_a}")
        if not self.truncated and self.exponent_a != 1.0:
            raise ValidationError("untruncated demand requires exponent_a = 1")
        if self.exponent_a != 1.0 and self.c != 0.0:
            raise ValidationError("exponent_a != 1 requires c = 0")

    @classmethod
    def constant(
        cls,
        c: float,
        d_low: float,
        d_high: float,
        q: float,
        T: int,
        truncated: bool = True,
        exponent_a: float = 1.0,
    ) -> "MarketParams":
        """Parameters with the same high-state probability ``q`` in every period."""
        return cls(c, d_low, d_high, (q,) * T, T, truncated, exponent_a)

    @property
    def linear(self) -> bool:
        return self.exponent_a == 1.0

    @property
    def constant_q(self) -> bool:
        return all(g == self.gammas[0] for g in self.gammas)

    @property
    def q(self) -> float:
        if not self.constant_q:
            raise UnsupportedConfigurationError("gammas are not constant across periods")
        return self.gammas[0]

    @property
    def p_high(self) -> float:
        return float(static_monopoly_price(self.d_high, self))

    @property
    def p_low(self) -> float:
        return float(static_monopoly_price(self.d_low, self))

    def replace(self, **changes) -> "MarketParams":
        if "gammas" in changes and "T" not in changes:
            changes["T"] = len(changes["gammas"])
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class PathOutcome:
    prices: np.ndarray
    avg_price: float
    total_profit: float
    total_cs: float | None = field(default=None)


def quantity(p, d, params: MarketParams):
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise ValidationError("price must be non-negative")
    if params.truncated:
        gap = np.maximum(d - p, 0.0)
        return gap if params.exponent_a == 1.0 else gap**params.exponent_a
    return d - p


def profit(p, d, params: MarketParams):
    """Per-period profit (p - c) * quantity."""
    return (np.asarray(p, dtype=float) - params.c) * quantity(p, d, params)


def cs(p, d, params: MarketParams):
    """Consumer surplus under linear demand, 0.5 * max(d - p, 0)^2."""
    if params.exponent_a != 1.0:
        raise UnsupportedConfigurationError("consumer surplus is only defined for exponent_a = 1")
    gap = np.maximum(d - np.asarray(p, dtype=float), 0.0)
    return 0.5 * gap * gap


def static_monopoly_price(d, params: MarketParams):
    """Single-period profit maximiser: (d + c)/2 for linear demand, d/(1 + a) otherwise."""
    if params.exponent_a == 1.0:
        return (np.asarray(d, dtype=float) + params.c) / 2.0
    return np.asarray(d, dtype=float) / (1.0 + params.exponent_a)


def path_outcome(prices: Sequence[float], highs: Sequence[bool], params: MarketParams) -> PathOutcome:
    """Average price, total profit and (linear demand only) total surplus of one price path."""
    prices = np.asarray(prices, dtype=float)
    d = np.where(np.asarray(highs, dtype=bool), params.d_high, params.d_low)
    total_cs = float(np.sum(cs(prices, d, params))) if params.linear else None
    return PathOutcome(
        prices=prices,
        avg_price=float(np.mean(prices)),
        total_profit=float(np.sum(profit(prices, d, params))),
        total_cs=total_cs,
    )
