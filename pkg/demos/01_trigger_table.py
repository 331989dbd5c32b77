"""Wait time and trigger distance across urban speeds.

A user raises the handover request 22 m before the blocked stretch of lane.
Everything between capture and handover completion costs a fixed ~153 ms;
the rest of the remaining time is spent waiting so that the link moves to the
new SBS as late as possible.
"""

from phosim import TimingBudget, mph_to_mps, trigger_table

budget = TimingBudget()
print(f"fixed cost t_s = {budget.t_s * 1000:.2f} ms "
      f"(capture {budget.t_rgb * 1e3:.2f}, detection {budget.t_odl * 1e3:.0f}, "
      f"inference {budget.t_inf * 1e3:.0f}, handover {budget.t_ho * 1e3:.0f})")

published = {5: 21.67, 10: 21.30, 15: 20.96, 20: 20.62, 25: 20.19, 30: 19.94, 35: 19.58}

speeds = sorted(published)
rows = trigger_table(22.0, [mph_to_mps(v) for v in speeds], budget)

print(f"\n{'mph':>4} {'T_toBLK':>8} {'T_w':>7} {'D':>7} {'D (pub)':>8}")
for mph, r in zip(speeds, rows):
    print(f"{mph:>4} {r['t_to_blk']:8.3f} {r['t_w']:7.3f} {r['d']:7.2f} {published[mph]:8.2f}")

# D shrinks with speed: the fixed 153 ms eats more metres at higher speed.
lost = [22.0 - r["d"] for r in rows]
print("\nmetres consumed by the fixed budget:", ", ".join(f"{m:.2f}" for m in lost))
