"""What handing over too early costs.

Shifting the completion point earlier along the path moves the user onto
SBS 2 while still further from it, so the new link starts weaker. Offsets
are in metres relative to the blocked-area boundary (negative = earlier).
"""

from phosim import config as cf
from phosim.engine import sweep, sweep_table

base = cf.build_scenario(cf.load_config())
offsets = [float(v) for v in range(-10, 1)]
rows = sweep_table(base, "trigger_offset", offsets, sweep(base, "trigger_offset", offsets))

print(f"{'offset':>7} {'x at HO':>8} {'RSSI':>8} {'drop':>6}")
for r in rows:
    print(f"{r['trigger_offset_m']:7.0f} {r['x_complete']:8.2f} {r['rssi_at_complete_dbm']:8.2f} "
          f"{r['norm_rssi_drop_pct']:5.1f}%")
