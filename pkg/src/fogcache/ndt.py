"""Closed-form normalized delivery times (NDTs).

Constituent delivery schemes, the offline achievable NDT and its pipelined
counterpart, and the long-term NDTs of C-RAN delivery, reactive caching
(fixed and adaptive fraction, known and unknown popular set) and proactive
pipelined caching.

Regime boundaries (``mu == 1/M`` and ``r == r_th``) belong to both adjacent
formulas; the smaller achievable value is returned there.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .model import FronthaulRequired, InvalidParams, NdtPair, SchemeKind, SystemParams

_EPS = 1e-12


class Regime(enum.Enum):
    LOW_FRONTHAUL_SMALL_CACHE = "low_fronthaul_small_cache"
    LOW_FRONTHAUL_LARGE_CACHE = "low_fronthaul_large_cache"
    HIGH_FRONTHAUL = "high_fronthaul"


@dataclass(frozen=True)
class AdaptiveThresholds:
    p0: float
    p1: float


def over_r(x: float, r: float) -> float:
    """x / r, where a zero numerator needs no fronthaul at all."""
    if x == 0:
        return 0.0
    if r == 0:
        raise FronthaulRequired(f"fronthaul load {x:g} needs r > 0")
    return x / r


def _cooperation_edge(params: SystemParams) -> float:
    return params.K / params.m


def _coordination_edge(params: SystemParams) -> float:
    return (params.M + params.K - 1) / params.M


def scheme_ndt(kind: SchemeKind, params: SystemParams) -> NdtPair:
    """NDT pair of one constituent scheme applied to the whole requested files."""
    if kind is SchemeKind.EN_COOPERATION:
        return NdtPair(0.0, _cooperation_edge(params))
    if kind is SchemeKind.EN_COORDINATION:
        return NdtPair(0.0, _coordination_edge(params))
    if kind is SchemeKind.CRAN_TRANSMISSION:
        if params.r == 0:
            raise FronthaulRequired("C-RAN transmission needs r > 0")
        return NdtPair(params.K / (params.M * params.r), _cooperation_edge(params))
    raise ValueError(f"unknown scheme {kind!r}")


def fronthaul_threshold(params: SystemParams) -> float:
    """Fronthaul rate separating the low- and high-fronthaul placements.

    ``math.inf`` when min(M, K) = 1: every rate then counts as low.
    """
    m = params.m
    if m == 1:
        return math.inf
    return params.K * (params.M - 1) / (params.M * (m - 1))


def _check_fraction(mu_eff: float) -> float:
    if not 0.0 <= mu_eff <= 1.0 + _EPS:
        raise InvalidParams(f"cached fraction must lie in [0, 1], got {mu_eff}")
    return min(mu_eff, 1.0)


def regimes(params: SystemParams, mu_eff: float | None = None) -> tuple[Regime, ...]:
    """Regimes whose formula applies at (mu_eff, r); two on a boundary."""
    mu = params.mu if mu_eff is None else _check_fraction(mu_eff)
    r_th = fronthaul_threshold(params)
    M = params.M
    out = []
    if params.r <= r_th * (1 + _EPS):
        if mu * M <= 1 + _EPS:
            out.append(Regime.LOW_FRONTHAUL_SMALL_CACHE)
        if M > 1 and mu * M >= 1 - _EPS:
            out.append(Regime.LOW_FRONTHAUL_LARGE_CACHE)
    if params.r >= r_th * (1 - _EPS):
        out.append(Regime.HIGH_FRONTHAUL)
    return tuple(out)


def placement_ndt(params: SystemParams, mu_eff: float, regime: Regime) -> NdtPair:
    """Serial NDT pair of the offline placement of ``regime`` with cached fraction ``mu_eff``.

    The formula is evaluated even outside the regime's natural range of
    ``mu_eff``; callers pick the regime.
    """
    mu = _check_fraction(mu_eff)
    M, K = params.M, params.K
    coop = _cooperation_edge(params)
    if regime is Regime.LOW_FRONTHAUL_SMALL_CACHE:
        # disjoint mu-fractions at the M ENs, coordination on mu*M, C-RAN on the rest
        w = min(mu * M, 1.0)
        if w > 1 - _EPS:
            w = 1.0
        return NdtPair(
            over_r((1.0 - w) * K / M, params.r),
            w * _coordination_edge(params) + (1.0 - w) * coop,
        )
    if regime is Regime.LOW_FRONTHAUL_LARGE_CACHE:
        if M == 1:
            return NdtPair(0.0, coop)
        shared = (mu * M - 1) / (M - 1)
        disjoint = M * (1 - mu) / (M - 1)
        return NdtPair(0.0, shared * coop + disjoint * _coordination_edge(params))
    if regime is Regime.HIGH_FRONTHAUL:
        # common mu-fraction at all ENs: cooperation on mu, C-RAN on 1 - mu
        return NdtPair(over_r((1.0 - mu) * K / M, params.r), coop)
    raise ValueError(f"unknown regime {regime!r}")


def offline_achievable(params: SystemParams, mu_eff: float | None = None) -> NdtPair:
    """Per-slot NDT pair of the offline caching and delivery policy.

    ``mu_eff`` is the fraction of every file held at each EN (defaults to
    ``params.mu``).
    """
    mu = params.mu if mu_eff is None else _check_fraction(mu_eff)
    pairs = [placement_ndt(params, mu, g) for g in regimes(params, mu)]
    return min(pairs, key=lambda pair: pair.serial_total)


def offline_achievable_pipelined(params: SystemParams, mu_eff: float | None = None) -> float:
    """Block-Markov pipelined offline NDT: best of the low- and high-fronthaul placements."""
    mu = params.mu if mu_eff is None else _check_fraction(mu_eff)
    low = []
    if mu * params.M <= 1 + _EPS:
        low.append(Regime.LOW_FRONTHAUL_SMALL_CACHE)
    if params.M > 1 and mu * params.M >= 1 - _EPS:
        low.append(Regime.LOW_FRONTHAUL_LARGE_CACHE)
    values = []
    error = None
    for g in low + [Regime.HIGH_FRONTHAUL]:
        try:
            values.append(placement_ndt(params, mu, g).pipelined_total)
        except FronthaulRequired as exc:
            error = exc
    if not values:
        raise error
    return min(values)


def cran_longterm_serial(params: SystemParams) -> float:
    return scheme_ndt(SchemeKind.CRAN_TRANSMISSION, params).serial_total


def cran_longterm_pipelined(params: SystemParams) -> float:
    return scheme_ndt(SchemeKind.CRAN_TRANSMISSION, params).pipelined_total


def steady_state_misses(params: SystemParams) -> float:
    """Long-run mean number of requested-but-uncached files per slot (known set)."""
    K, N, p = params.K, params.N, params.p
    return K * p / (K * (1 - p / N) + p)


def reactive_known_decomposition(params: SystemParams, mu_eff: float | None = None) -> NdtPair:
    """Long-term (delta_F, delta_E) of reactive caching with known popular set.

    The refresh overhead mu * E[R_t] / r lands on the fronthaul component.
    """
    mu = params.mu if mu_eff is None else _check_fraction(mu_eff)
    off = offline_achievable(params, mu)
    overhead = over_r(mu * steady_state_misses(params), params.r)
    return NdtPair(off.delta_F + overhead, off.delta_E)


def reactive_known_longterm(params: SystemParams, mu_eff: float | None = None) -> float:
    return reactive_known_decomposition(params, mu_eff).serial_total


def adaptive_thresholds(params: SystemParams) -> AdaptiveThresholds:
    """Popularity-churn thresholds of the adaptive cached-fraction rule.

    Below ``p0`` caching the full fraction mu is best, between ``p0`` and
    ``p1`` caching 1/M is best, above ``p1`` plain C-RAN delivery wins.
    """
    if params.r == 0:
        raise FronthaulRequired("adaptive thresholds need r > 0")
    M, K, N, r, m = params.M, params.K, params.N, params.r, params.m
    if r <= fronthaul_threshold(params):
        c1 = K - r * (m - 1)
        p1 = c1 / (1 + c1 * (1 / N - 1 / K))
        if M == 1:
            p0 = p1
        else:
            p0 = K * r * (m - 1) / (K * (M - 1) + r * (m - 1) * (K / N - 1))
    else:
        p0 = p1 = K / (M + K / N - 1)
    p0 = min(max(p0, 0.0), 1.0)
    p1 = min(max(p1, 0.0), 1.0)
    return AdaptiveThresholds(p0, max(p1, p0))


def adaptive_fraction(params: SystemParams) -> float:
    """Cached fraction chosen by the adaptive rule at churn probability ``params.p``.

    In the middle band the rule caches 1/M; when mu itself is below 1/M the
    band keeps mu (a larger fraction would not fit).
    """
    th = adaptive_thresholds(params)
    p = params.p
    if p <= th.p0:
        return params.mu
    if p <= th.p1:
        return min(params.mu, 1.0 / params.M)
    return 0.0


def adaptive_known_longterm(params: SystemParams) -> tuple[float, float]:
    """Long-term NDT of reactive caching with adaptive fraction, and the fraction cached."""
    frac = adaptive_fraction(params)
    if frac == 0.0:
        return cran_longterm_serial(params), 0.0
    return reactive_known_longterm(params, frac), frac


def effective_alpha(params: SystemParams, alpha: float | None = None) -> float:
    """Over-provisioning factor realised with an integer number floor(alpha*N) of cached files."""
    a = params.alpha if alpha is None else alpha
    n_files = math.floor(a * params.N + 1e-9)
    if n_files <= params.N:
        raise InvalidParams(
            f"alpha={a} gives floor(alpha*N)={n_files} cached files, need more than N={params.N}"
        )
    return n_files / params.N


def reactive_unknown_upper(params: SystemParams, alpha: float | None = None) -> float:
    """Upper bound on the long-term NDT of reactive caching with unknown popular set."""
    a = params.alpha if alpha is None else alpha
    if not a > 1:
        raise InvalidParams(f"alpha must exceed 1, got {a}")
    p, N, mu = params.p, params.N, params.mu
    if p >= N:
        raise InvalidParams(f"need p < N, got p={p}, N={N}")
    off = offline_achievable(params, mu / a).serial_total
    return off + over_r(p * mu / ((1 - p / N) * (a - 1)), params.r)


def proactive_candidates(params: SystemParams) -> list[tuple[NdtPair, float]]:
    """(placement, long-term NDT) pairs of proactive pipelined caching.

    Coordination placement for mu <= 1/M, cooperation placement for
    mu >= 1/M; both on the boundary.
    """
    mu, M, p = params.mu, params.M, params.p
    regs = []
    if mu * M <= 1 + _EPS:
        regs.append(Regime.LOW_FRONTHAUL_SMALL_CACHE)
    if mu * M >= 1 - _EPS:
        regs.append(Regime.HIGH_FRONTHAUL)
    out = []
    for g in regs:
        pair = placement_ndt(params, mu, g)
        value = (1 - p) * pair.pipelined_total
        if p > 0:
            push = over_r(mu, params.r)
            value += p * max(pair.delta_F + push, pair.delta_E)
        out.append((pair, value))
    return out


def proactive_decomposition(params: SystemParams) -> NdtPair:
    """Per-slot placement used by proactive caching (before any push overhead)."""
    return min(proactive_candidates(params), key=lambda c: c[1])[0]


def proactive_pipelined_longterm(params: SystemParams) -> float:
    return min(v for _, v in proactive_candidates(params))


def gap_f(params: SystemParams, alpha: float) -> float:
    """Additive gap between online reactive caching and twice the optimal offline NDT."""
    if params.r == 0:
        raise FronthaulRequired("gap function needs r > 0")
    if not alpha > 1:
        raise InvalidParams(f"alpha must exceed 1, got {alpha}")
    r, N, p, mu = params.r, params.N, params.p, params.mu
    return 1 / r + (1 / alpha) * (1 - 1 / r) + N * p * (mu / r) / ((N - p) * (alpha - 1))
