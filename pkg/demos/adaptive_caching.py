"""
Adaptive caching under popularity churn
=======================================

When the popular set changes quickly, refreshing a full cache costs more
fronthaul than it saves. The adaptive rule shrinks the cached fraction as
the churn probability ``p`` grows. It first drops to ``1/M`` and then to
nothing, which means plain cloud transmission.
"""

import numpy as np

from fogcache import ndt
from fogcache.model import SystemParams

# Ten edge nodes, five users, five popular files, half of each file cacheable.
base = SystemParams(M=10, K=5, N=5, mu=0.5, r=1.1, p=0.0)

th = ndt.adaptive_thresholds(base)
print(f"thresholds: p0 = {th.p0:.4f}, p1 = {th.p1:.4f}")

# Walk the churn probability and compare the three options.
print(f"{'p':>5} {'reactive':>9} {'c-ran':>7} {'adaptive':>9} {'cached':>7}")
for p in np.linspace(0, 1, 21):
    params = base.replace(p=float(p))
    value, frac = ndt.adaptive_known_longterm(params)
    print(f"{p:5.2f} {ndt.reactive_known_longterm(params):9.4f} "
          f"{ndt.cran_longterm_serial(params):7.4f} {value:9.4f} {frac:7.2f}")

# The adaptive curve is never above either fixed choice.
