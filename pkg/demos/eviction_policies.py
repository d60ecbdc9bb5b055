"""
Eviction without knowledge of the popular set
=============================================

If the edge nodes are not told which files stopped being popular, they
over-provision: cache ``alpha * N`` files at ``mu / alpha`` each and evict
by some rule. This compares random, LRU and FIFO eviction with the
known-set baseline and with the analytic upper bound for random eviction.
"""

from fogcache import ndt
from fogcache.model import REACTIVE_KNOWN, SystemParams, reactive_unknown
from fogcache.sim import SimConfig, run_trace

base = SystemParams(M=10, K=5, N=20, mu=0.1, r=0.2, p=0.0, alpha=2.0)
T, reps = 50_000, 5

policies = [REACTIVE_KNOWN, reactive_unknown("random"), reactive_unknown("lru"),
            reactive_unknown("fifo")]

header = " ".join(f"{str(pol):>24}" for pol in policies)
print(f"{'p':>4} {header} {'bound':>8}")
for p in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
    params = base.replace(p=p)
    cells = []
    for pol in policies:
        res = run_trace(SimConfig(params, pol, T, replications=reps, master_seed=1))
        cells.append(f"{res.ndt_mean:16.4f} +-{res.ndt_ci95_halfwidth:6.4f}")
    print(f"{p:4.1f} {' '.join(cells)} {ndt.reactive_unknown_upper(params):8.4f}")

# Known set < LRU ~ FIFO < random <= bound, for any appreciable churn.
