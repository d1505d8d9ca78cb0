"""Seeded Monte Carlo policy evaluation and synthetic price archives.

Randomness is counter-based: the uniform for (seed, replication, period) is

    u = mix(mix(mix(seed) ^ replication) ^ period) >> 11, scaled by 2^-53

where ``mix`` is the SplitMix64 step (add 0x9E3779B97F4A7C15, then the
SplitMix64 finaliser). Every draw is a pure function of three integers, so
results do not depend on call order, chunking, or the number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Iterator

import numpy as np

from .errors import ValidationError
from .model import MarketParams
from .policy import FlexiblePolicy, Policy, path_totals, roll_out

POLICY_KINDS = ("flexible", "regulated_closed_form", "regulated_tabulated")
CHUNK = 1 << 16
NOISE_CLIP_SD = 4.0
DEFAULT_START = datetime(2026, 3, 18)

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def mix64(x) -> np.ndarray:
    """SplitMix64 step applied element-wise to uint64 values (wrapping arithmetic)."""
    with np.errstate(over="ignore"):
        z = np.asarray(x, dtype=np.uint64) + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, replications: np.ndarray, periods: int) -> np.ndarray:
    """Uniforms in [0, 1) of shape (len(replications), periods)."""
    key = mix64(np.uint64(seed & _MASK))
    r = mix64(key ^ np.asarray(replications, dtype=np.uint64))[:, None]
    t = np.arange(1, periods + 1, dtype=np.uint64)[None, :]
    h = mix64(r ^ t)
    return (h >> np.uint64(11)).astype(np.float64) * 2.0**-53


def draw_demand_matrix(seed: int, replications: np.ndarray, params: MarketParams) -> np.ndarray:
    """Boolean high-demand indicators, one row per replication."""
    u = uniforms(seed, np.asarray(replications), params.T)
    return u < np.asarray(params.gammas)[None, :]


def draw_demand_path(seed: int, replication: int, params: MarketParams) -> np.ndarray:
    return draw_demand_matrix(seed, np.array([replication]), params)[0]


@dataclass(frozen=True)
class SimConfig:
    params: MarketParams
    policy: str = "flexible"
    replications: int = 10_000
    seed: int = 0
    grid_points: int = 2001

    def __post_init__(self):
        if self.policy not in POLICY_KINDS:
            raise ValidationError(f"policy must be one of {POLICY_KINDS}, got {self.policy!r}")
        if int(self.replications) != self.replications or self.replications < 1:
            raise ValidationError(f"replications must be a positive integer, got {self.replications}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class SimReport:
    mean_avg_price: float
    stderr_avg_price: float
    stderr_defined: bool
    mean_total_profit: float
    mean_total_cs: float | None
    per_period_mean_price: tuple[float, ...]
    replications: int


def build_policy(params: MarketParams, kind: str, grid_points: int = 2001) -> Policy:
    if kind == "flexible":
        return FlexiblePolicy(params)
    if kind == "regulated_closed_form":
        from .closed_form import regulated_policy

        return regulated_policy(params)
    if kind == "regulated_tabulated":
        from .dp_oracle import GridSpec, solve_dp

        return solve_dp(params, GridSpec.default(params, grid_points))
    raise ValidationError(f"unknown policy kind {kind!r}")


def _simulate_chunk(args):
    policy, params, seed, start, stop = args
    reps = np.arange(start, stop, dtype=np.uint64)
    highs = draw_demand_matrix(seed, reps, params)
    prices = roll_out(policy, highs)
    avg, prof, surplus = path_totals(prices, highs, params)
    return prices, avg, prof, surplus


def run_mc(config: SimConfig, workers: int = 1, policy: Policy | None = None) -> SimReport:
    """Evaluate a policy on ``replications`` seeded demand paths.

    Chunk boundaries are fixed (independent of ``workers``) and chunk results
    are concatenated in replication order before any reduction, so the report
    is bit-identical for any worker count.
    """
    params = config.params
    policy = policy or build_policy(params, config.policy, config.grid_points)
    n = config.replications
    tasks = [(policy, params, config.seed, s, min(s + CHUNK, n)) for s in range(0, n, CHUNK)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_simulate_chunk, tasks))
    else:
        parts = [_simulate_chunk(t) for t in tasks]
    prices = np.concatenate([p[0] for p in parts])
    avg = np.concatenate([p[1] for p in parts])
    prof = np.concatenate([p[2] for p in parts])
    surplus = None if parts[0][3] is None else np.concatenate([p[3] for p in parts])

    mean = float(np.mean(avg))
    if n > 1:
        stderr = float(np.std(avg, ddof=1) / math.sqrt(n))
    else:
        stderr = 0.0
    return SimReport(
        mean_avg_price=mean,
        stderr_avg_price=stderr,
        stderr_defined=n > 1,
        mean_total_profit=float(np.mean(prof)),
        mean_total_cs=None if surplus is None else float(np.mean(surplus)),
        per_period_mean_price=tuple(float(v) for v in prices.mean(axis=0)),
        replications=n,
    )


def reform_instant(reform_day: int, start: datetime = DEFAULT_START) -> datetime:
    """Midnight opening the first regulated day (days are numbered from 1)."""
    return start + timedelta(days=reform_day - 1)


def _day_replication(day: int, station: int, stations: int) -> int:
    return (day - 1) * stations + station


def synthesize_archive(
    config: SimConfig,
    stations: int,
    days: int,
    reform_day: int,
    noise_sd: float = 0.0,
    start: datetime = DEFAULT_START,
    regulated_policy: Policy | None = None,
) -> Iterator["PriceRecord"]:
    """Hourly station quotes: flexible pricing before ``reform_day``, regulated from it on.

    Each model period spans 24/T consecutive hours starting at midnight. The
    demand path of (day, station) is replication (day-1)*stations + station
    of ``config.seed``. Noise is Gaussian, clipped at +-4 sd, then quoted to
    four decimals. ``config.policy`` names the regulated rule (``flexible``
    there falls back to the closed form).
    """
    from .empirics import PriceRecord

    params = config.params
    if stations < 1 or days < 1:
        raise ValidationError("stations and days must be positive")
    if not 1 <= reform_day <= days:
        raise ValidationError(f"reform_day must lie in 1..{days}, got {reform_day}")
    if 24 % params.T:
        raise ValidationError(f"T={params.T} does not divide 24")
    if noise_sd < 0:
        raise ValidationError("noise_sd must be non-negative")
    hours_per_period = 24 // params.T
    flex = FlexiblePolicy(params)
    if regulated_policy is None:
        kind = "regulated_closed_form" if config.policy == "flexible" else config.policy
        regulated_policy = build_policy(params, kind, config.grid_points)

    for day in range(1, days + 1):
        policy = flex if day < reform_day else regulated_policy
        reps = np.array([_day_replication(day, s, stations) for s in range(stations)], dtype=np.uint64)
        highs = draw_demand_matrix(config.seed, reps, params)
        period_prices = roll_out(policy, highs)
        hourly = np.repeat(period_prices, hours_per_period, axis=1)
        if noise_sd > 0:
            rng = np.random.default_rng([config.seed & _MASK, 0x5EED, day])
            noise = np.clip(rng.standard_normal(hourly.shape), -NOISE_CLIP_SD, NOISE_CLIP_SD)
            hourly = hourly + noise_sd * noise
        day_start = start + timedelta(days=day - 1)
        for s in range(stations):
            sid = f"s{s + 1:03d}"
            for h in range(24):
                price = round(float(hourly[s, h]), 4)
                if price <= 0:
                    raise ValidationError("noise produced a non-positive price; lower noise_sd")
                yield PriceRecord(sid, day_start + timedelta(hours=h), price)
