"""Slot-by-slot Monte Carlo simulation of online caching policies.

Two execution paths share one definition of a slot:

* :func:`run_slot` is a readable reference built from
  :func:`~fogcache.popularity.step_popularity`,
  :func:`~fogcache.popularity.draw_requests` and :func:`evict`;
* :func:`run_trace` drives a compiled kernel that consumes the same stream of
  uniform draws in the same order, so both paths give identical traces for the
  same generator state.

Within a slot: popularity step, eviction of stale files (known popular set),
proactive push (proactive policy), request draw, miss count R_t, reactive
fetch with eviction on a full cache, then the slot NDT.  Files requested in
the current slot are never evicted while that slot is served.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numba
import numpy as np

from . import __version__
from .model import (
    EmptyCache,
    Eviction,
    InvalidParams,
    NdtPair,
    PolicyFamily,
    PolicyKind,
    SystemParams,
)
from .ndt import (
    adaptive_fraction,
    cran_longterm_serial,
    effective_alpha,
    offline_achievable,
    over_r,
    proactive_decomposition,
    scheme_ndt,
)
from .model import SchemeKind
from .popularity import (
    GENERATOR_NAME,
    PopularSet,
    draw_requests,
    make_rng,
    step_popularity,
    uniform_index,
)

_EVICTION_CODE = {None: 0, Eviction.RANDOM: 1, Eviction.LRU: 2, Eviction.FIFO: 3}


# ---------------------------------------------------------------------------
# policy plan: everything a slot needs to know about a policy


@dataclass(frozen=True)
class SlotPlan:
    """Per-slot cost model and cache geometry of a policy."""

    uses_cache: bool
    known: bool
    proactive: bool
    eviction: Eviction | None
    capacity_files: int
    per_file_fraction: float
    base: NdtPair
    # fronthaul NDT per requested-but-uncached file
    miss_cost: float
    # fronthaul NDT of a proactive push
    push_cost: float
    pipelined: bool

    def slot_ndt(self, R, pushed):
        """Serial and pipelined slot NDTs; works elementwise on arrays."""
        front = self.base.delta_F + self.miss_cost * R + self.push_cost * pushed
        return front + self.base.delta_E, np.maximum(front, self.base.delta_E)


def plan_policy(params: SystemParams, policy: PolicyKind) -> SlotPlan:
    fam = policy.family
    if fam is PolicyFamily.CRAN_ONLY:
        base = scheme_ndt(SchemeKind.CRAN_TRANSMISSION, params)
        return SlotPlan(False, True, False, None, 0, 0.0, base, 0.0, 0.0, False)
    if fam is PolicyFamily.REACTIVE_ADAPTIVE_KNOWN:
        frac = adaptive_fraction(params)
        if frac == 0.0:
            base = scheme_ndt(SchemeKind.CRAN_TRANSMISSION, params)
            return SlotPlan(False, True, False, None, 0, 0.0, base, 0.0, 0.0, False)
        return SlotPlan(True, True, False, None, params.N, frac,
                        offline_achievable(params, frac), over_r(frac, params.r), 0.0, False)
    if fam is PolicyFamily.PROACTIVE_PIPELINED:
        mu = params.mu
        base = proactive_decomposition(params)
        cost = over_r(mu, params.r)
        return SlotPlan(True, True, True, None, params.N, mu, base, cost, cost, True)
    if policy.knows_popular_set:
        mu, cap = params.mu, params.N
    else:
        a = effective_alpha(params)
        mu, cap = params.mu / a, round(a * params.N)
    return SlotPlan(True, policy.knows_popular_set, False, policy.cache_eviction, cap, mu,
                    offline_achievable(params, mu), over_r(mu, params.r), 0.0, policy.pipelined)


# ---------------------------------------------------------------------------
# reference path


@dataclass
class CacheEntry:
    fraction: float
    inserted_slot: int
    last_request_slot: int


@dataclass
class CacheState:
    capacity_files: int
    per_file_fraction: float
    entries: dict = field(default_factory=dict)

    def insert(self, file_id: int, t: int) -> None:
        if len(self.entries) >= self.capacity_files:
            raise AssertionError("cache insert beyond capacity")
        self.entries[int(file_id)] = CacheEntry(self.per_file_fraction, t, t)

    def __contains__(self, file_id) -> bool:
        return int(file_id) in self.entries

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class TraceState:
    popular: PopularSet
    cache: CacheState
    t: int = 0

    @classmethod
    def initial(cls, params: SystemParams, plan: SlotPlan) -> "TraceState":
        return cls(PopularSet.initial(params.N),
                   CacheState(plan.capacity_files, plan.per_file_fraction))


@dataclass(frozen=True)
class SlotRecord:
    t: int
    R_t: int
    ndt_serial: float
    ndt_pipelined: float
    replaced: bool = False


def evict(cache: CacheState, eviction: Eviction, rng: np.random.Generator,
          protected=frozenset()) -> int:
    """Remove and return one entry chosen by ``eviction``.

    Entries in ``protected`` are never chosen.  Random eviction draws one
    uniform and indexes the candidates in increasing id order.
    """
    candidates = sorted(f for f in cache.entries if f not in protected)
    if not candidates:
        raise EmptyCache("no evictable entry")
    if eviction is Eviction.RANDOM:
        victim = candidates[uniform_index(rng.random(), len(candidates))]
    elif eviction is Eviction.LRU:
        victim = min(candidates, key=lambda f: (cache.entries[f].last_request_slot,
                                                cache.entries[f].inserted_slot, f))
    elif eviction is Eviction.FIFO:
        victim = min(candidates, key=lambda f: (cache.entries[f].inserted_slot, f))
    else:
        raise ValueError(f"unknown eviction {eviction!r}")
    del cache.entries[victim]
    return victim


def run_slot(state: TraceState, params: SystemParams, plan: SlotPlan,
             rng: np.random.Generator) -> tuple[TraceState, SlotRecord]:
    """Advance ``state`` (in place) by one slot and return it with the slot record."""
    t = state.t + 1
    cache = state.cache
    popular, replaced, inserted = step_popularity(state.popular, params.p, rng)
    if replaced is not None and plan.known and replaced in cache:
        del cache.entries[replaced]
    pushed = 0
    if plan.proactive and inserted is not None:
        cache.insert(inserted, t)
        pushed = 1
    demands = draw_requests(popular, params.K, rng)
    if plan.uses_cache:
        protected = frozenset(int(d) for d in demands)
        missing = [int(d) for d in demands if d not in cache]
        for d in protected:
            if d in cache:
                cache.entries[d].last_request_slot = t
        for d in missing:
            if len(cache) >= cache.capacity_files:
                evict(cache, plan.eviction, rng, protected)
            cache.insert(d, t)
        R = len(missing)
    else:
        R = params.K
    serial, pipelined = plan.slot_ndt(R, pushed)
    state.popular, state.t = popular, t
    return state, SlotRecord(t, R, float(serial), float(pipelined), replaced is not None)


# ---------------------------------------------------------------------------
# compiled kernel


@numba.njit(cache=True, nogil=True)
def _uidx(u, n):
    i = int(u * n)
    return i if i < n else n - 1


@numba.njit(cache=True, nogil=True)
def _remove(fid, slot_of, c_id, c_ins, c_last, size):
    s = slot_of[fid]
    last = size - 1
    if s != last:
        moved = c_id[last]
        c_id[s] = moved
        c_ins[s] = c_ins[last]
        c_last[s] = c_last[last]
        slot_of[moved] = s
    slot_of[fid] = -1
    return last


@numba.njit(cache=True, nogil=True)
def _kernel(buf, pos, t, t_end, p, K, uses_cache, known, proactive, eviction,
            files, perm, demands, cand, slot_of, c_id, c_ins, c_last, state,
            R_out, changed_out, occ_out):
    # state = [next_id, cache size]
    N = files.shape[0]
    need = 2 + 2 * K
    nbuf = buf.shape[0]
    next_id = state[0]
    size = state[1]
    while t <= t_end:
        if pos + need > nbuf:
            break
        pushed = 0
        u = buf[pos]
        pos += 1
        if u < p:
            idx = _uidx(buf[pos], N)
            pos += 1
            old = files[idx]
            files[idx] = next_id
            if known and slot_of[old] >= 0:
                size = _remove(old, slot_of, c_id, c_ins, c_last, size)
            if proactive:
                c_id[size] = next_id
                c_ins[size] = t
                c_last[size] = t
                slot_of[next_id] = size
                size += 1
                pushed = 1
            next_id += 1
        for i in range(N):
            perm[i] = i
        for i in range(K):
            j = i + _uidx(buf[pos], N - i)
            pos += 1
            tmp = perm[i]
            perm[i] = perm[j]
            perm[j] = tmp
        for i in range(K):
            demands[i] = files[perm[i]]
        R = 0
        if uses_cache:
            for i in range(K):
                s = slot_of[demands[i]]
                if s >= 0:
                    c_last[s] = t
            cap = c_id.shape[0]
            for i in range(K):
                d = demands[i]
                if slot_of[d] >= 0:
                    continue
                R += 1
                if size >= cap:
                    n = 0
                    for s in range(size):
                        f = c_id[s]
                        prot = False
                        for k in range(K):
                            if demands[k] == f:
                                prot = True
                                break
                        if not prot:
                            cand[n] = f
                            n += 1
                    if eviction == 1:
                        # in-place insertion sort, no allocation in the hot loop
                        for a in range(1, n):
                            f = cand[a]
                            b = a - 1
                            while b >= 0 and cand[b] > f:
                                cand[b + 1] = cand[b]
                                b -= 1
                            cand[b + 1] = f
                        victim = cand[_uidx(buf[pos], n)]
                        pos += 1
                    else:
                        victim = cand[0]
                        for k in range(1, n):
                            f = cand[k]
                            a = slot_of[f]
                            b = slot_of[victim]
                            if eviction == 2:
                                better = (c_last[a], c_ins[a], f) < (c_last[b], c_ins[b], victim)
                            else:
                                better = (c_ins[a], f) < (c_ins[b], victim)
                            if better:
                                victim = f
                    size = _remove(victim, slot_of, c_id, c_ins, c_last, size)
                c_id[size] = d
                c_ins[size] = t
                c_last[size] = t
                slot_of[d] = size
                size += 1
        else:
            R = K
        R_out[t - 1] = R
        changed_out[t - 1] = pushed if proactive else (1 if u < p else 0)
        occ_out[t - 1] = size
        t += 1
    state[0] = next_id
    state[1] = size
    return t, pos


_CHUNK = 1 << 16


def simulate_misses(params: SystemParams, plan: SlotPlan, T: int,
                    rng: np.random.Generator) -> dict:
    """Run T slots from empty caches; per-slot miss counts, change flags and cache occupancy."""
    N, K = params.N, params.K
    n_ids = N + T + 1
    cap = max(plan.capacity_files, 1)
    files = np.arange(N, dtype=np.int64)
    slot_of = np.full(n_ids, -1, dtype=np.int64)
    c_id = np.zeros(cap, dtype=np.int64)
    c_ins = np.zeros(cap, dtype=np.int64)
    c_last = np.zeros(cap, dtype=np.int64)
    perm = np.zeros(N, dtype=np.int64)
    demands = np.zeros(K, dtype=np.int64)
    cand = np.zeros(cap, dtype=np.int64)
    state = np.array([N, 0], dtype=np.int64)
    R = np.zeros(T, dtype=np.int16)
    changed = np.zeros(T, dtype=np.int8)
    occ = np.zeros(T, dtype=np.int32)
    buf = rng.random(_CHUNK)
    pos, t = 0, 1
    while t <= T:
        t, pos = _kernel(buf, pos, t, T, float(params.p), K, plan.uses_cache, plan.known,
                         plan.proactive, _EVICTION_CODE[plan.eviction], files, perm, demands,
                         cand, slot_of, c_id, c_ins, c_last, state, R, changed, occ)
        if t <= T:
            buf = np.concatenate([buf[pos:], rng.random(_CHUNK)])
            pos = 0
    return {"R": R, "changed": changed, "occupancy": occ, "files": files}


# ---------------------------------------------------------------------------
# trace driver


def default_warmup(params: SystemParams, T: int) -> int:
    """Transient cut-off: ten popularity-turnover times, at most a tenth of the horizon."""
    return int(round(min(10 * params.N / max(params.p, 1 / T), T / 10)))


@dataclass(frozen=True)
class SimConfig:
    params: SystemParams
    policy: PolicyKind
    horizon_T: int
    replications: int = 1
    master_seed: int = 0
    warmup_slots: int | None = None

    def __post_init__(self):
        if self.horizon_T < 1:
            raise InvalidParams(f"horizon_T must be >= 1, got {self.horizon_T}")
        if self.replications < 1:
            raise InvalidParams(f"replications must be >= 1, got {self.replications}")
        if self.warmup_slots is not None and not 0 <= self.warmup_slots < self.horizon_T:
            raise InvalidParams(f"need 0 <= warmup_slots < horizon_T, got {self.warmup_slots}")

    @property
    def warmup(self) -> int:
        if self.warmup_slots is None:
            return default_warmup(self.params, self.horizon_T)
        return self.warmup_slots


@dataclass
class SimResult:
    """Long-term averages over post-warmup slots, aggregated across replications.

    ``ndt_mean`` is the serial NDT for serial policies and the pipelined NDT
    for pipelined ones; both are also reported separately.  Confidence
    half-widths come from replication means (0.0 with a single replication).
    """

    ndt_mean: float
    ndt_ci95_halfwidth: float
    miss_rate_mean: float
    delta_F_mean: float
    delta_E_mean: float
    ndt_serial_mean: float
    ndt_pipelined_mean: float
    replication_ndt: np.ndarray
    metadata: dict
    slots: list | None = None

    @property
    def standard_error(self) -> float:
        return self.ndt_ci95_halfwidth / 1.96


def _ci95(values: np.ndarray) -> float:
    if len(values) < 2:
        return 0.0
    return float(1.96 * np.std(values, ddof=1) / math.sqrt(len(values)))


def _run_replication(config: SimConfig, plan: SlotPlan, rep: int, keep_slots: bool) -> dict:
    rng = make_rng(config.master_seed, rep)
    raw = simulate_misses(config.params, plan, config.horizon_T, rng)
    R = raw["R"].astype(float)
    pushed = raw["changed"].astype(float) if plan.proactive else 0.0
    serial, pipelined = plan.slot_ndt(R, pushed)
    serial = np.broadcast_to(serial, R.shape)
    pipelined = np.broadcast_to(pipelined, R.shape)
    front = serial - plan.base.delta_E
    w = config.warmup
    out = {
        "serial": float(serial[w:].mean()),
        "pipelined": float(pipelined[w:].mean()),
        "R": float(R[w:].mean()),
        "F": float(front[w:].mean()),
        "max_occupancy": int(raw["occupancy"].max()),
    }
    if keep_slots:
        out["slots"] = {"R": raw["R"], "changed": raw["changed"], "occupancy": raw["occupancy"],
                        "ndt_serial": np.array(serial), "ndt_pipelined": np.array(pipelined)}
    return out


def run_trace(config: SimConfig, keep_slots: bool = False, threads: int = 1) -> SimResult:
    """Monte Carlo estimate of a policy's long-term NDT.

    Replication ``i`` uses the substream ``(master_seed, i)``; results do not
    depend on ``threads``.
    """
    params = config.params
    plan = plan_policy(params, config.policy)
    reps = range(config.replications)
    if threads == 1 or config.replications == 1:
        outs = [_run_replication(config, plan, i, keep_slots) for i in reps]
    else:
        with ThreadPoolExecutor(max_workers=threads or None) as pool:
            outs = list(pool.map(lambda i: _run_replication(config, plan, i, keep_slots), reps))
    if max(o["max_occupancy"] for o in outs) > plan.capacity_files:
        raise AssertionError("cache capacity exceeded")
    serial = np.array([o["serial"] for o in outs])
    pipelined = np.array([o["pipelined"] for o in outs])
    reported = pipelined if plan.pipelined else serial
    metadata = {
        "generator": GENERATOR_NAME,
        "master_seed": config.master_seed,
        "substreams": "SeedSequence(master_seed, spawn_key=(replication,))",
        "policy": str(config.policy),
        "params": params.to_dict(),
        "horizon_T": config.horizon_T,
        "replications": config.replications,
        "warmup_slots": config.warmup,
        "capacity_files": plan.capacity_files,
        "per_file_fraction": plan.per_file_fraction,
        "version": __version__,
    }
    return SimResult(
        ndt_mean=float(reported.mean()),
        ndt_ci95_halfwidth=_ci95(reported),
        miss_rate_mean=float(np.mean([o["R"] for o in outs])),
        delta_F_mean=float(np.mean([o["F"] for o in outs])),
        delta_E_mean=plan.base.delta_E,
        ndt_serial_mean=float(serial.mean()),
        ndt_pipelined_mean=float(pipelined.mean()),
        replication_ndt=reported,
        metadata=metadata,
        slots=[o["slots"] for o in outs] if keep_slots else None,
    )


# ---------------------------------------------------------------------------
# scalar Markov chain of the number of cached popular files (known set)


def _hypergeom_pmf(N: int, uncached: int, K: int) -> np.ndarray:
    """P(R = k), k = 0..K, when K of N files are requested and ``uncached`` of them are missing."""
    total = math.comb(N, K)
    return np.array([math.comb(uncached, k) * math.comb(N - uncached, K - k) / total
                     for k in range(K + 1)])


def cached_count_chain(params: SystemParams) -> np.ndarray:
    """Transition matrix of X_t, the number of popular files cached at the start of a slot."""
    N, K, p = params.N, params.K, params.p
    P = np.zeros((N + 1, N + 1))
    for x in range(N + 1):
        for k, prob in enumerate(_hypergeom_pmf(N, N - x, K)):
            if prob == 0.0:
                continue
            after = x + k
            lost = p * after / N
            P[x, after] += prob * (1 - lost)
            if after > 0:
                P[x, after - 1] += prob * lost
    return P


def stationary_distribution(P: np.ndarray) -> np.ndarray:
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = np.linalg.solve(A, b)
    return np.clip(pi, 0.0, None) / np.clip(pi, 0.0, None).sum()


def miss_count_distribution(params: SystemParams) -> np.ndarray:
    """Stationary distribution of R_t over 0..K under reactive caching with known set."""
    N, K = params.N, params.K
    pi = stationary_distribution(cached_count_chain(params))
    out = np.zeros(K + 1)
    for x, w in enumerate(pi):
        out += w * _hypergeom_pmf(N, N - x, K)
    return out


def markov_oracle(params: SystemParams, method: str = "simulate", steps: int = 10**6,
                  seed: int = 0, chains: int = 1000, burn_in: int = 500) -> float:
    """Steady-state mean number of misses per slot, computed without the closed form.

    ``"simulate"`` runs ``chains`` independent copies of the scalar chain
    X_{t+1} = X_t + R_t - V_t for ``steps`` post-burn-in transitions in total;
    ``"stationary"`` solves the finite chain exactly.
    """
    N, K, p = params.N, params.K, params.p
    if method == "stationary":
        dist = miss_count_distribution(params)
        return float(np.dot(np.arange(K + 1), dist))
    if method != "simulate":
        raise ValueError(f"unknown method {method!r}")
    rng = make_rng(seed)
    X = np.zeros(chains, dtype=np.int64)
    n_steps = -(-steps // chains)
    total = 0
    for step in range(burn_in + n_steps):
        R = rng.hypergeometric(N - X, X, K) if K < N else N - X
        after = X + R
        V = rng.random(chains) < p * after / N
        X = after - V
        if step >= burn_in:
            total += int(R.sum())
    return total / (n_steps * chains)


def reactive_pipelined_known_exact(params: SystemParams) -> float:
    """Long-term pipelined NDT of reactive caching with known set, from the stationary R_t law."""
    plan = plan_policy(params, PolicyKind(PolicyFamily.REACTIVE_PIPELINED, known=True))
    dist = miss_count_distribution(params)
    _, pipelined = plan.slot_ndt(np.arange(params.K + 1, dtype=float), 0.0)
    return float(np.dot(dist, pipelined))
