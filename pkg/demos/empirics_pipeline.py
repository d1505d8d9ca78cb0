"""Synthesize a station archive, then summarise it by hour of day.

Run: python3 demos/empirics_pipeline.py
"""

from ratchet_pricing import MarketParams
from ratchet_pricing import empirics as em
from ratchet_pricing import sim

params = MarketParams(0.0, 1.0, 4.0, (0.3, 0.6))  # corner market
config = sim.SimConfig(params, "regulated_closed_form", seed=11)
records = list(sim.synthesize_archive(config, stations=20, days=14, reform_day=8, noise_sd=0.01))
reform = sim.reform_instant(8)
print(f"{len(records)} quotes, reform at {reform.isoformat()}")

# round trip through the CSV format
parsed = em.parse_archive(em.archive_to_csv(records))
assert parsed.records == records

rows = em.hourly_diff(parsed.records, reform)
print("\nhour  before  after   diff   90% interval")
for r in rows[::3]:
    print(f"{r.hour:4d}  {r.mean_before:.3f}  {r.mean_after:.3f}  {r.diff:+.3f}  [{r.ci90_lo:+.3f}, {r.ci90_hi:+.3f}]")

print()
for window in (em.BEFORE, em.AFTER):
    b = em.box_whisker(parsed.records, window, reform)[6]
    print(f"hour 6 {window:6s} min={b.min:.3f} q1={b.q1:.3f} median={b.median:.3f} q3={b.q3:.3f} max={b.max:.3f}")
# Morning prices sit at p_H after the reform whatever the demand: the corner policy.
