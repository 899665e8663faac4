"""
Flying underneath another drone
===============================

A Kolibri holds altitude while a heavier vehicle crosses overhead.  With the
downwash model fed forward into the throttle, the altitude sag mostly vanishes.
"""

import numpy as np

from downwash.control import bundled_config, compare, power_ratio, throttle_compensation

# the compensation law: extra power in a downwash, and the throttle that pays for it
for alpha in (0.0, 0.5, 1.0, 2.0):
    beta = power_ratio(alpha)
    print(f"alpha = {alpha:3.1f}  beta = {beta:.4f}  throttle x {throttle_compensation(beta):.4f}")

for name in ("passunder_1m", "passunder_2m"):
    cfg = bundled_config(name)
    cmp = compare(cfg)
    on, off = cmp.compensated, cmp.uncompensated
    print(f"\n{name}: {cfg.upper_drone.name} {cfg.vertical_separation:.1f} m above {cfg.lower_drone.name}")
    print(f"  uncompensated RMSE {off.rmse_mm:7.2f} mm, worst {off.max_abs_error_mm:7.2f} mm")
    print(f"  compensated   RMSE {on.rmse_mm:7.3f} mm, worst {on.max_abs_error_mm:7.3f} mm")
    print(f"  improvement x{cmp.improvement_ratio:.0f}")
    i = int(np.argmax(on.u_d))
    print(f"  peak downwash {on.u_d[i]:.2f} m/s at t = {on.t[i]:.2f} s, beta {on.beta[i]:.3f}")
