"""
Pipelined fronthaul and proactive pushes
========================================

With pipelining, fronthaul and edge transmissions overlap, so a slot costs
the larger of the two rather than their sum. Idle fronthaul can then be
spent pushing newly popular content before anyone asks for it.
"""

import numpy as np

from fogcache import ndt, sim
from fogcache.model import PROACTIVE_PIPELINED, REACTIVE_KNOWN, SystemParams, reactive_pipelined
from fogcache.sim import SimConfig, run_trace

base = SystemParams(M=4, K=3, N=6, mu=0.5, r=1.0, p=0.5)

print(f"{'mu':>5} {'serial':>8} {'pipelined':>10} {'proactive':>10}")
for mu in np.linspace(0, 1, 11):
    params = base.replace(mu=float(mu))
    print(f"{mu:5.2f} {ndt.reactive_known_longterm(params):8.4f} "
          f"{sim.reactive_pipelined_known_exact(params):10.4f} "
          f"{ndt.proactive_pipelined_longterm(params):10.4f}")

# Simulated traces agree with the exact values, and per slot the pipelined
# time is between half the serial time and the serial time.
for pol in (REACTIVE_KNOWN, reactive_pipelined(True), PROACTIVE_PIPELINED):
    res = run_trace(SimConfig(base, pol, 20_000, replications=4), keep_slots=True)
    s, pl = res.slots[0]["ndt_serial"], res.slots[0]["ndt_pipelined"]
    assert np.all(pl <= s) and np.all(s <= 2 * pl)
    print(f"{str(pol):>26}: serial {res.ndt_serial_mean:.4f}, pipelined {res.ndt_pipelined_mean:.4f}")
