"""Acceptance criteria, one test each, at their stated tolerances.

Every test records a ``PASS``/``FAIL`` line that is printed in the pytest
terminal summary (and immediately, when run with ``-s``).
"""
import itertools
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from fogcache import bounds, cli, ndt, sim
from fogcache.model import (CRAN_ONLY, PROACTIVE_PIPELINED, REACTIVE_ADAPTIVE_KNOWN,
                            REACTIVE_KNOWN, SystemParams, reactive_pipelined, reactive_unknown)
from fogcache.sim import SimConfig, run_trace

from lp_oracle import brute_force_min_sum

REF = SystemParams(M=10, K=5, N=20, mu=0.1, r=0.2, p=0.5, alpha=2.0)


def report(n, title, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}  ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def combined_se(a, b):
    return math.hypot(a.standard_error, b.standard_error)


def test_criterion_1_steady_state_misses():
    params = SystemParams(10, 5, 20, 0.1, 0.2, 0.5)
    start = time.perf_counter()
    est = sim.markov_oracle(params, steps=10**6)
    elapsed = time.perf_counter() - start
    closed = ndt.steady_state_misses(params)
    ok = abs(est - 0.46512) <= 0.005 and elapsed < 5 and abs(closed - 2.5 / 5.375) <= 1e-12
    report(1, "steady-state miss rate", ok,
           f"chain {est:.5f} in {elapsed:.2f}s, closed form {closed:.12f}")


def test_criterion_2_reactive_known_simulation():
    run_trace(SimConfig(REF, REACTIVE_KNOWN, 100))  # compile outside the timer
    start = time.perf_counter()
    res = run_trace(SimConfig(REF, REACTIVE_KNOWN, 200_000, replications=20))
    elapsed = time.perf_counter() - start
    err = abs(res.ndt_mean - 1.6325581)
    ok = err <= max(0.02, 3 * res.ndt_ci95_halfwidth) and elapsed < 30
    report(2, "known-set reactive closed form vs simulation", ok,
           f"mean {res.ndt_mean:.5f} +- {res.ndt_ci95_halfwidth:.5f}, {elapsed:.1f}s")


def test_criterion_3_adaptive_thresholds():
    params = SystemParams(10, 5, 5, 0.5, 1.1, 0.0)
    th = ndt.adaptive_thresholds(params)
    ok = abs(th.p0 - 22 / 45) <= 1e-12 and abs(th.p1 - 0.6) <= 1e-12
    eps = 1e-9
    left = ndt.adaptive_known_longterm(params.replace(p=th.p0 - eps))[0]
    right = ndt.adaptive_known_longterm(params.replace(p=th.p0 + eps))[0]
    ok &= abs(left - right) <= 1e-6
    worst = -math.inf
    for p in np.linspace(0, 1, 101):
        q = params.replace(p=float(p))
        a = ndt.adaptive_known_longterm(q)[0]
        worst = max(worst, a - min(ndt.reactive_known_longterm(q), ndt.cran_longterm_serial(q)))
    ok &= worst <= 1e-12
    report(3, "adaptive thresholds and curve", ok,
           f"p0={th.p0:.12f}, p1={th.p1:.12f}, jump at p0 {abs(left - right):.1e}, "
           f"max excess {worst:.1e}")


def test_criterion_4_unknown_bound_certified():
    start = time.perf_counter()
    failures = []
    for p in np.round(np.linspace(0, 1, 11), 10):
        params = REF.replace(p=float(p))
        res = run_trace(SimConfig(params, reactive_unknown("random"), 100_000, replications=10))
        bound = ndt.reactive_unknown_upper(params)
        if res.ndt_mean > bound + 3 * res.ndt_ci95_halfwidth:
            failures.append((float(p), res.ndt_mean, bound))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 120
    report(4, "unknown-set upper bound over the p sweep", ok,
           f"{11 - len(failures)}/11 points certified in {elapsed:.1f}s")


def test_criterion_5_factor_two_and_solver():
    worst_ratio = 0.0
    for M, K in itertools.product(range(1, 7), repeat=2):
        for mu in np.linspace(0, 1, 21):
            for r in (0.1, 0.5, 1.0, 2.0, 10.0):
                params = SystemParams(M, K, 2 * K, float(mu), r, 0.5)
                ach = ndt.offline_achievable(params).serial_total
                worst_ratio = max(worst_ratio, ach / bounds.offline_lower_bound(params))
    rng = np.random.default_rng(12345)
    worst_gap = 0.0
    for _ in range(100):
        M, K = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        params = SystemParams(M, K, 2 * K, float(rng.random()),
                              float(rng.choice([0.1, 0.5, 1.0, 2.0, 10.0])), 0.5)
        build = bounds.build_offline_lp if rng.random() < 0.5 else bounds.build_online_slot_lp
        lp = build(params)
        worst_gap = max(worst_gap, abs(bounds.solve_min_sum(lp).objective
                                       - brute_force_min_sum(lp.constraints)))
    ok = worst_ratio <= 2 + 1e-12 and worst_gap <= 2e-3
    report(5, "factor-2 achievability and LP solver vs brute force", ok,
           f"max ach/lb {worst_ratio:.4f}, max solver gap {worst_gap:.1e}")


def test_criterion_6_sandwich():
    violations = 0
    count = 0
    for M in range(2, 7):
        for K in range(2, M + 1):
            for N in (M + 1, 2 * M + 3):
                for mu in (0.0, 0.1, 0.25, 0.5, 1.0):
                    for r in (0.1, 0.5, 1.0, 2.0, 10.0):
                        for p in (0.0, 0.3, 0.7, 1.0):
                            params = SystemParams(M, K, N, mu, r, p)
                            s = bounds.sandwich_eval(params)
                            v = ndt.reactive_known_longterm(params)
                            count += 1
                            violations += not (s.lower <= v <= s.upper)
    # 1/r-attributable part of upper - lower, at mu >= 1/M and fixed p
    worst_factor = math.inf
    for M, K, N in ((4, 2, 6), (6, 3, 10), (10, 5, 20)):
        for mu in (1 / M, 0.5, 1.0):
            for r in (0.1, 1.0, 10.0):
                base = SystemParams(M, K, N, mu, 1e12, 0.5)
                s_inf = bounds.sandwich_eval(base)
                gap_inf = s_inf.upper - s_inf.lower
                parts = []
                for rr in (r, 10 * r):
                    s = bounds.sandwich_eval(base.replace(r=rr))
                    parts.append(s.upper - s.lower - gap_inf)
                worst_factor = min(worst_factor, parts[0] / parts[1])
    ok = violations == 0 and worst_factor >= 5
    report(6, "sandwich containment and O(1/r) gap", ok,
           f"{count - violations}/{count} points contained, min 1/r-part reduction x{worst_factor:.2f}")


def test_criterion_7_pipelined_relations():
    policies = [CRAN_ONLY, REACTIVE_KNOWN, REACTIVE_ADAPTIVE_KNOWN, PROACTIVE_PIPELINED,
                reactive_unknown("random"), reactive_unknown("lru"), reactive_unknown("fifo"),
                reactive_pipelined(True), reactive_pipelined(False)]
    slots = 0
    bad = 0
    for params in (REF, REF.replace(p=0.9, r=1.5, mu=0.4), SystemParams(4, 3, 6, 1.0, 1.0, 0.5)):
        for policy in policies:
            res = run_trace(SimConfig(params, policy, 5000, replications=2), keep_slots=True)
            for rep in res.slots:
                s, pl = rep["ndt_serial"], rep["ndt_pipelined"]
                slots += len(s)
                bad += int(np.sum((pl > s + 1e-12) | (s > 2 * pl + 1e-12)))
    worst = 0.0
    for M, K in itertools.product(range(1, 7), repeat=2):
        for r in (0.1, 0.5, 1.0, 2.0, 10.0):
            params = SystemParams(M, K, 2 * K, 0.3, r, 0.5)
            m = min(M, K)
            worst = max(worst, abs(ndt.cran_longterm_pipelined(params) - max(K / (M * r), K / m)))
    ok = bad == 0 and worst <= 1e-12
    report(7, "pipelined vs serial per slot; C-RAN pipelined", ok,
           f"{slots - bad}/{slots} slots satisfy the relation, C-RAN error {worst:.1e}")


def test_criterion_8_proactive():
    values = [ndt.proactive_pipelined_longterm(SystemParams(4, 3, 6, 1.0, 1.0, p)) for p in (0, 0.5, 1)]
    ok = all(abs(v - 1.0) <= 1e-12 for v in values)
    worst = 0.0
    for M, K in ((4, 3), (6, 2), (10, 5), (3, 5)):
        for r in (50.0, 500.0):
            off = ndt.offline_achievable_pipelined(SystemParams(M, K, 2 * K, 1.0, r, 0.0))
            for p in np.linspace(0, 1, 11):
                v = ndt.proactive_pipelined_longterm(SystemParams(M, K, 2 * K, 1.0, r, float(p)))
                worst = max(worst, abs(v - off))
    ok &= worst <= 1e-12
    report(8, "proactive pipelined values and saturation", ok,
           f"values {values}, max deviation from offline pipelined {worst:.1e}")


def test_criterion_9_eviction_ordering():
    lines = []
    ok = True
    for p in (0.5, 0.8):
        params = REF.replace(p=p)
        res = {ev: run_trace(SimConfig(params, reactive_unknown(ev), 200_000, replications=20))
               for ev in ("random", "lru", "fifo")}
        for ev in ("lru", "fifo"):
            margin = res["random"].ndt_mean - res[ev].ndt_mean
            z = margin / combined_se(res["random"], res[ev])
            ok &= z > 3
            lines.append(f"p={p} {ev} below random by {z:.0f} SE")
    report(9, "LRU and FIFO improve on random eviction", ok, "; ".join(lines))


def test_criterion_10_determinism():
    config = cli.ExperimentConfig.from_dict({
        "base": REF.to_dict(),
        "policies": ["reactive_known", "reactive_unknown:random", "reactive_unknown:lru"],
        "sweep": {"variable": "p", "values": [0.2, 0.8]},
        "sim": {"T": 5000, "replications": 3, "seed": 17},
    })
    first = cli.render_csv(cli.SIMULATE_COLUMNS, cli.cmd_simulate(config))
    second = cli.render_csv(cli.SIMULATE_COLUMNS, cli.cmd_simulate(config))
    ok = first.encode() == second.encode()
    report(10, "byte-identical simulation CSV", ok, f"{len(first.encode())} bytes compared")
