"""Curved demand breaks neutrality; which way does it go?

Run: python3 demos/curvature_gap.py
"""

from ratchet_pricing import dp_oracle as dp
from ratchet_pricing import nonlinear as nl

# %% Delta(q, a) on a small grid (regulated minus flexible expected average price)
rows = nl.sweep_delta([0.25, 0.5, 0.75], [0.8, 0.9, 1.0, 1.1, 1.2])
print(nl.sweep_to_csv(rows))

# %% Same quantity from a brute-force grid search that uses no first-order condition
inst = nl.NonlinearInstance.make(0.5, 0.9)
tab = dp.solve_dp(inst.params, dp.GridSpec(0.0, 1.0, 20001))
reg = dp.enumerate_expectation(tab, inst.params).expected_avg_price
flex = 0.5 * inst.p_high + 0.5 * inst.p_low
print(f"q=0.5 a=0.9: bisection {nl.delta(inst):+.6f}  grid search {reg - flex:+.6f}")

# %% Slope at a = 1: finite differences versus the published expression
print("\n   q      FD(h)      FD(h/2)    published  FD - published")
for row in nl.slope_audit([0.1, 0.3, 0.5, 0.7, 0.9]):
    print(f"  {row['q']:.1f}  {row['fd']:+.7f} {row['fd_half']:+.7f} {row['closed']:+.7f} {row['discrepancy']:+.7f}")
# The finite-difference slope is the published one with the sign flipped, so
# Delta falls below zero for a < 1 and rises above zero for a > 1.

# %% Five periods with the grid-DP policy
for a in (0.9, 1.1):
    print(f"T=5 a={a}: Delta ~ {nl.delta_multi_period(0.5, a, 5):+.5f}")
