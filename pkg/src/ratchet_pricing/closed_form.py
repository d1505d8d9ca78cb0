"""Analytic pricing policies and expectations.

Two settings are covered:

* the two-period model with truncated linear demand and period-specific
  high-state probabilities (interior/corner regimes);
* the T-period model with untruncated linear demand and a constant
  high-state probability q, where the low-state target follows a
  geometric-sum rule.
"""

from __future__ import annotations

import enum

from .errors import DomainError, UnsupportedConfigurationError
from .model import MarketParams, cs
from .policy import FlexiblePolicy, RegulatedClosedFormPolicy


class Regime(enum.Enum):
    INTERIOR = "Interior"
    CORNER = "Corner"

    def __str__(self):
        return self.value


def _require_two_period(params: MarketParams) -> None:
    if params.T != 2:
        raise UnsupportedConfigurationError(f"two-period formula called with T={params.T}")
    if not params.linear or not params.truncated:
        raise UnsupportedConfigurationError("two-period formulas need truncated linear demand")


def _require_t_period(params: MarketParams) -> None:
    if not params.linear or params.truncated:
        raise UnsupportedConfigurationError("T-period formulas need untruncated linear demand")
    if not params.constant_q:
        raise UnsupportedConfigurationError("T-period formulas need a constant high-state probability")


def kappa(params: MarketParams) -> float:
    """Demand-gap ratio (d_high - d_low)/(d_low - c)."""
    return (params.d_high - params.d_low) / (params.d_low - params.c)


def gamma_tilde(params: MarketParams) -> float | None:
    """Corner threshold on gamma_2; ``None`` when its denominator is not positive."""
    denom = params.c + params.d_high - 2.0 * params.d_low
    if denom <= 0:
        return None
    return (params.d_low - params.c) / denom


def regime_classify(params: MarketParams) -> Regime:
    """Corner iff kappa > 2 and gamma_2 >= gamma_tilde (boundary counts as Corner)."""
    _require_two_period(params)
    gt = gamma_tilde(params)
    if kappa(params) > 2 and gt is not None and params.gammas[1] >= gt:
        return Regime.CORNER
    return Regime.INTERIOR


def interior_candidate(params: MarketParams) -> float:
    """Stationary point of the period-1 low-state objective, (p_L + g2 p_H)/(1 + g2)."""
    g2 = params.gammas[1]
    return (params.p_low + g2 * params.p_high) / (1.0 + g2)


def corner_profit_gap(params: MarketParams) -> float:
    """Expected-profit advantage of p_H over the best price in [p_L, d_L], period 1, low state.

    Positive means charging p_H is strictly better. This compares the two
    candidates directly rather than relying on the gamma_tilde threshold,
    which only checks whether the stationary point lies below d_L.
    """
    _require_two_period(params)
    g2 = params.gammas[1]
    c, dl, dh = params.c, params.d_low, params.d_high
    p_in = min(interior_candidate(params), dl)
    below = (p_in - c) * (dl - p_in) + g2 * (p_in - c) * (dh - p_in)
    ph = params.p_high
    above = (ph - c) * max(dl - ph, 0.0) + g2 * (ph - c) * (dh - ph)
    return above - below


def two_period_policy(params: MarketParams) -> RegulatedClosedFormPolicy:
    """Regulated two-period policy with the period-1 low price set by :func:`regime_classify`."""
    _require_two_period(params)
    p_h, p_l = params.p_high, params.p_low
    if regime_classify(params) is Regime.CORNER:
        p1_low = p_h
    else:
        p1_low = interior_candidate(params)
    return RegulatedClosedFormPolicy(p_h, (p1_low, p_l))


def flexible_policy(params: MarketParams) -> FlexiblePolicy:
    return FlexiblePolicy(params)


def expected_avg_price_flexible(params: MarketParams) -> float:
    if not params.linear:
        raise UnsupportedConfigurationError("closed form assumes linear demand")
    p_h, p_l = params.p_high, params.p_low
    return sum(g * p_h + (1.0 - g) * p_l for g in params.gammas) / params.T


def expected_avg_price_regulated_2p(params: MarketParams) -> float:
    _require_two_period(params)
    if regime_classify(params) is Regime.INTERIOR:
        return expected_avg_price_flexible(params)
    g2 = params.gammas[1]
    p_h, p_l = params.p_high, params.p_low
    return 0.5 * (p_h + g2 * p_h + (1.0 - g2) * p_l)


def expected_cs_diff_2p(params: MarketParams) -> float:
    """E[CS regulated] - E[CS flexible] over both periods."""
    _require_two_period(params)
    g1, g2 = params.gammas
    if regime_classify(params) is Regime.INTERIOR:
        return (1.0 - g1) * 3.0 * g2 * (params.d_high - params.d_low) ** 2 / (8.0 * (1.0 + g2))
    dl = params.d_low
    return (1.0 - g1) * float(cs(params.p_high, dl, params) - cs(params.p_low, dl, params))


def geometric_sum(n: int, q: float) -> float:
    """S_n = 1 + q + ... + q^n (S_{-1} = 0 by convention)."""
    if n < -1:
        raise DomainError(f"n must be >= -1, got {n}")
    s = 0.0
    for _ in range(n + 1):
        s = 1.0 + q * s
    return s


def t_period_low_target(t: int, params: MarketParams) -> float:
    """Low-state target p_H - (p_H - p_L)/S_{T-t}; equals p_L at t = T."""
    _require_t_period(params)
    if not 1 <= t <= params.T:
        raise DomainError(f"period {t} outside 1..{params.T}")
    p_h, p_l = params.p_high, params.p_low
    return p_h - (p_h - p_l) / geometric_sum(params.T - t, params.q)


def t_period_policy(params: MarketParams) -> RegulatedClosedFormPolicy:
    _require_t_period(params)
    targets = [t_period_low_target(t, params) for t in range(1, params.T + 1)]
    return RegulatedClosedFormPolicy(params.p_high, targets)


def marginal_ceiling_value(t: int, x: float, params: MarketParams) -> float:
    """Slope of the ex-ante continuation value in the ceiling, q S_{T-t} (d_H + c - 2x).

    At c = 0 this is the stated q S_{T-t} (d_H - 2x). The c term is an
    extrapolation of the same induction. The formula describes the value
    function for ceilings at or above the period's low target; below it the
    low-state constraint binds and the true slope is larger.
    """
    _require_t_period(params)
    if not 1 <= t <= params.T:
        raise DomainError(f"period {t} outside 1..{params.T}")
    if not params.p_low <= x <= params.p_high:
        raise DomainError(f"ceiling {x} outside [p_L, p_H] = [{params.p_low}, {params.p_high}]")
    return params.q * geometric_sum(params.T - t, params.q) * (params.d_high + params.c - 2.0 * x)


def regulated_policy(params: MarketParams) -> RegulatedClosedFormPolicy:
    """Closed-form regulated policy for whichever analytic setting ``params`` falls in."""
    if params.linear and params.truncated and params.T == 2:
        return two_period_policy(params)
    if params.linear and not params.truncated and params.constant_q:
        return t_period_policy(params)
    if not params.linear and params.T == 2 and params.constant_q:
        from .nonlinear import nonlinear_policy

        return nonlinear_policy(params)
    raise UnsupportedConfigurationError(
        "no closed-form regulated policy for this configuration; use the DP oracle"
    )
