"""Two periods, truncated linear demand: when does the no-increase rule bind?

Run: python3 demos/two_period_regimes.py
"""

import numpy as np

from ratchet_pricing import MarketParams
from ratchet_pricing import closed_form as cf
from ratchet_pricing import dp_oracle as dp

# %% The two reference markets
for label, params in (
    ("A", MarketParams(0.0, 1.0, 2.0, (0.3, 0.5))),
    ("B", MarketParams(0.0, 1.0, 4.0, (0.3, 0.6))),
):
    policy = cf.two_period_policy(params)
    print(f"market {label}: kappa={cf.kappa(params):g} regime={cf.regime_classify(params)}")
    print(f"  static prices p_H={params.p_high:g} p_L={params.p_low:g}")
    print(f"  regulated period-1 low-state price {policy.low_targets[0]:.6f}")
    print(
        f"  E[avg price] flexible {cf.expected_avg_price_flexible(params):.4f}"
        f" regulated {cf.expected_avg_price_regulated_2p(params):.4f}"
        f"  E[CS] change {cf.expected_cs_diff_2p(params):+.4f}"
    )

# %% Cross-check market A against the grid oracle
params = MarketParams(0.0, 1.0, 2.0, (0.3, 0.5))
for points in (501, 2001, 8001):
    tab = dp.solve_dp(params, dp.GridSpec.default(params, points))
    p1 = float(tab.price(1, np.array([np.inf]), np.array([False]))[0])
    print(f"grid {points:5d}: oracle p1_low={p1:.6f} error={abs(p1 - 2 / 3):.2e}")

# %% Sweep gamma_2 across the threshold of market B
base = MarketParams(0.0, 1.0, 4.0, (0.3, 0.6))
print("\ngamma_2  regime    E[avg] gap   profit gap of p_H")
for g2 in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8):
    p = base.replace(gammas=(0.3, g2))
    gap = cf.expected_avg_price_regulated_2p(p) - cf.expected_avg_price_flexible(p)
    print(f"  {g2:4.2f}   {str(cf.regime_classify(p)):9s} {gap:8.4f}   {cf.corner_profit_gap(p):+8.4f}")
# The last column is the exact profit advantage of staying at p_H over the best
# lower price. It turns positive near gamma_2 = 1/(kappa^2 - 1) = 0.125, well before
# the classification threshold of 0.5, so the grid oracle picks p_H there too.
