"""
The base-station antenna seen from above and below
==================================================

A 16-element vertical array tilted down by 5 degrees puts its main lobe
below the horizon. A ground user close to the site sits in that lobe; an
aerial user above the mast only ever sees the upper side lobes.
"""

import numpy as np

from aerocov import SystemConfig, antenna
from aerocov.critical_height import predicted_main_lobe_height

cfg = SystemConfig()
ant = cfg.antenna

# Peak gain: element maximum plus 10 log10(N)
print(f"peak gain, N={ant.n_v}: {antenna.peak_gain(ant):.2f} dBi")

# A vertical cut through boresight. theta = 90 is the horizon, larger is downward.
theta, gain = antenna.pattern_cut(ant, step=0.5)
for t in (60.0, 80.0, 90.0, 95.0, 100.0, 120.0):
    print(f"theta={t:5.1f} deg  gain={gain[np.argmin(np.abs(theta - t))]:7.2f} dBi")

# More elements: narrower, taller main lobe
for n in (16, 32, 64):
    print(f"N={n:2d}: peak {antenna.peak_gain(cfg.replace(n_elements=n).antenna):.2f} dBi")

# Height at which the main lobe of a BS at distance r0 reaches the user
for r0 in (50.0, 100.0, 200.0):
    print(f"r0={r0:5.0f} m -> main lobe at h={predicted_main_lobe_height(cfg, r0):.2f} m")

antenna.write_pattern_csv("pattern_cut.csv", ant)
