"""Directional lag scan: single-lag statistics with per-lag 95% bounds.

The innovations below share a factor with a three-step lead: series 2 at
time t depends on what will drive series 1 at time t+3.  The scan shows
the direction-2 statistic spiking at lag 3 while direction 1 stays under
its bounds everywhere.
"""

import numpy as np

from tsindep import BootstrapConfig, LagConfig, fit_var, hsic_test_suite
from tsindep.models import _simulate_var

rng = np.random.default_rng(21)
n, burn, lead = 300, 200, 3
coef = np.array([[0.4, 0.1], [-0.3, 0.5]])

factor = np.abs(rng.normal(size=n + burn + lead)) + 0.2
e1 = rng.normal(size=(n + burn, 2)) * factor[: n + burn, None]  # factor at t
e2 = rng.normal(size=(n + burn, 2)) * factor[lead:, None]       # factor at t + lead
y1 = _simulate_var(coef, 1, False, e1)[burn:]
y2 = _simulate_var(coef, 1, False, e2)[burn:]

fit1, fit2 = fit_var(y1, p=1), fit_var(y2, p=1)
cfg = BootstrapConfig(n_replicates=199, master_seed=9)
max_lag = 6
scans = [LagConfig(direction=d, m=m) for d in (1, 2) for m in range(max_lag + 1)]
outcomes = hsic_test_suite(fit1, fit2, scans, cfg=cfg)

print("lag  direction  n*S      bound95   exceeds")
for out in outcomes:
    flag = "  <== " if out.scaled > out.critical_values[0.05] else ""
    print(
        f"{out.lag:3d}      S{out.direction}    {out.scaled:8.4f}  {out.critical_values[0.05]:8.4f}{flag}"
    )
print("\n(S2(m) pairs series-1 values at t+m with series-2 values at t,")
print(" so the lag-3 spike in direction 2 matches the built-in lead)")
