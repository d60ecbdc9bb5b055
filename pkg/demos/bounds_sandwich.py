"""
How far from optimal?
=====================

Two small linear programs give lower bounds on the delivery time of any
scheme, offline or online. Here they are set against the achievable
reactive scheme, together with the looser envelope whose width shrinks
like ``1/r``.
"""

from fogcache import bounds, ndt
from fogcache.model import SystemParams

params = SystemParams(M=10, K=5, N=20, mu=0.1, r=0.2, p=0.5)

off_lp = bounds.build_offline_lp(params)
print("offline cuts (a*dE + b*dF >= c):")
print(off_lp.constraints)
sol = bounds.solve_min_sum(off_lp)
print(f"offline bound {sol.objective:.4f} at dE={sol.delta_E:.4f}, dF={sol.delta_F:.4f}")
print(f"offline achievable {ndt.offline_achievable(params).serial_total:.4f}")

print()
print(f"{'r':>6} {'lower':>8} {'longterm lb':>12} {'reactive':>9} {'upper':>8}")
for r in (0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0):
    q = params.replace(r=r)
    s = bounds.sandwich_eval(q)
    print(f"{r:6.1f} {s.lower:8.4f} {bounds.longterm_lower_bound(q):12.4f} "
          f"{ndt.reactive_known_longterm(q):9.4f} {s.upper:8.4f}")
