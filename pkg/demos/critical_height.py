"""
How high can an aerial user fly and still do as well as a ground user?
======================================================================

Coverage is evaluated on one fixed set of PPP layouts at every height, so the
curve is smooth enough to locate its peaks and bisect the point where it
falls back to the ground user's value.
"""

from aerocov import SystemConfig
from aerocov.critical_height import HeightEvaluator, find_critical_height

cfg = SystemConfig()
ev = HeightEvaluator(cfg, [5.0, 10.0], samples=300, master_seed=0)
for t in (5.0, 10.0):
    res = find_critical_height(cfg, t, evaluator=ev)
    peaks = ", ".join(f"{h:g} m ({p:.3f})" for h, p in res.peaks)
    print(f"T={t:g} dB: ground p_cov={res.p_cov_ground:.3f}, h_c={res.h_c:.2f} m, peaks: {peaks}")
print(f"{ev.calls} heights evaluated")
