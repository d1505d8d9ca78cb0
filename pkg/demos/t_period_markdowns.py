"""Many periods, constant q: the low-state target drifts down to p_L.

Run: python3 demos/t_period_markdowns.py
"""

import numpy as np

from ratchet_pricing import MarketParams
from ratchet_pricing import closed_form as cf
from ratchet_pricing import dp_oracle as dp

# %% Targets for an eight-period day
for q in (0.25, 0.5, 0.75):
    p = MarketParams.constant(0.0, 1.0, 2.0, q, 8, truncated=False)
    targets = cf.t_period_policy(p).low_targets
    print(f"q={q:4.2f} targets " + " ".join(f"{v:.4f}" for v in targets))

# %% The first-period target is bounded away from p_H
# S_n grows to 1/(1-q), so p_bar_1 approaches p_H - (1-q)(p_H - p_L).
for T in (2, 8, 32, 128):
    p = MarketParams.constant(0.0, 1.0, 2.0, 0.5, T, truncated=False)
    print(f"T={T:4d} p_bar_1={cf.t_period_low_target(1, p):.6f} (limit 0.75)")

# %% Neutrality by exact enumeration
p = MarketParams.constant(0.0, 1.0, 2.0, 0.5, 10, truncated=False)
rep = dp.enumerate_expectation(cf.t_period_policy(p), p)
print(f"\nT=10: E[avg] regulated {rep.expected_avg_price:.15f} over {rep.path_count} paths")
print("per-period expected price " + " ".join(f"{v:.3f}" for v in rep.per_period_expected_price))

# %% Oracle value function slope against the closed form
p = MarketParams.constant(0.0, 1.0, 2.0, 0.5, 3, truncated=False)
tab = dp.solve_dp(p, dp.GridSpec(0.0, 2.0, 2001))
h = tab.grid.step
for x in (0.6, 0.75, 0.9):
    i = int(round(x / h))
    w = tab.value_function(1)
    fd = (w[i + 1] - w[i - 1]) / (2 * h)
    print(f"x={x:.2f} FD slope {fd:.5f} closed form {cf.marginal_ceiling_value(1, x, p):.5f}")
# Below p_bar_1 = 0.714 the ceiling caps the low-state price and is worth more
# than the formula says; above it the two agree.
