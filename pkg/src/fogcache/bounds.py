"""Converse bounds from two-variable linear programs, and the online/offline sandwich.

Every LP here has the form

    minimize    dE + dF
    subject to  a * dE + b * dF >= c   for each generated cut
                dE >= 1,  dF >= 0

and is solved exactly by enumerating the vertices of the feasible region.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .model import FronthaulRequired, Infeasible, SystemParams
from .ndt import offline_achievable

_TOL = 1e-9


@dataclass(frozen=True)
class LpInstance:
    """Cuts ``a*dE + b*dF >= c`` as rows ``(a, b, c)``; the box dE >= 1, dF >= 0 is implicit."""

    constraints: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.constraints, dtype=float).reshape(-1, 3)
        object.__setattr__(self, "constraints", arr)

    def with_box(self) -> np.ndarray:
        return np.vstack([self.constraints, [[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]])

    def is_feasible(self, dE: float, dF: float, tol: float = _TOL) -> bool:
        rows = self.with_box()
        slack = rows[:, 0] * dE + rows[:, 1] * dF - rows[:, 2]
        return bool(np.all(slack >= -tol * np.maximum(1.0, np.abs(rows[:, 2]))))


@dataclass(frozen=True)
class LpSolution:
    delta_E: float
    delta_F: float

    @property
    def objective(self) -> float:
        return self.delta_E + self.delta_F


def _cut_rhs(K: int, l: int, uncached: int, M: int, mu: float) -> float:
    # at most min(files, (M-l) ENs' worth of cache) of the `uncached` files can sit in the caches
    return K - min(uncached, (M - l) * uncached * mu)


def build_offline_lp(params: SystemParams) -> LpInstance:
    """Offline cut-set LP, one cut per l = 0..min(M, K)."""
    M, K, r, mu = params.M, params.K, params.r, params.mu
    rows = [(l, (M - l) * r, _cut_rhs(K, l, K - l, M, mu)) for l in range(min(M, K) + 1)]
    return LpInstance(np.array(rows))


def build_online_slot_lp(params: SystemParams) -> LpInstance:
    """Cut-set LP of a slot in which one requested file cannot be cached.

    One cut per l = 0..min(M, K-1); larger l would give a negative
    fronthaul coefficient.
    """
    M, K, r, mu = params.M, params.K, params.r, params.mu
    rows = [(l, (M - l) * r, _cut_rhs(K, l, K - l - 1, M, mu)) for l in range(min(M, K - 1) + 1)]
    return LpInstance(np.array(rows))


def solve_min_sum(lp: LpInstance) -> LpSolution:
    """Exact optimum by vertex enumeration.

    Every pair of constraint boundaries (box included) is intersected, the
    feasible intersections are kept and the one with the smallest objective
    wins (ties broken towards smaller dF).
    """
    rows = lp.with_box()
    if np.any((rows[:, 0] <= 0) & (rows[:, 1] <= 0) & (rows[:, 2] > _TOL)):
        raise Infeasible("a cut with no positive coefficient demands a positive value")
    best = None
    for i, j in itertools.combinations(range(len(rows)), 2):
        a1, b1, c1 = rows[i]
        a2, b2, c2 = rows[j]
        det = a1 * b2 - a2 * b1
        if abs(det) < 1e-14:
            continue
        dE = (c1 * b2 - c2 * b1) / det
        dF = (a1 * c2 - a2 * c1) / det
        if not lp.is_feasible(dE, dF):
            continue
        key = (dE + dF, dF)
        if best is None or key < best[0]:
            best = (key, dE, dF)
    if best is None:
        raise Infeasible("no feasible vertex")
    _, dE, dF = best
    return LpSolution(float(max(dE, 1.0)), float(max(dF, 0.0)))


def offline_lower_bound(params: SystemParams) -> float:
    """Lower bound on the minimum offline NDT."""
    return solve_min_sum(build_offline_lp(params)).objective


def online_slot_lower_bound(params: SystemParams) -> float:
    """Lower bound on the NDT of a slot in which one requested file is uncached."""
    return solve_min_sum(build_online_slot_lp(params)).objective


def longterm_lower_bound(params: SystemParams) -> float:
    """Lower bound on the minimum long-term NDT of any online policy (serial delivery).

    A genie refreshes the caches for free; with probability K*p/N one
    requested file is new and therefore uncached.
    """
    q = params.K * params.p / params.N
    off = offline_lower_bound(params)
    if q == 0:
        return off
    return (1 - q) * off + q * online_slot_lower_bound(params)


@dataclass(frozen=True)
class Sandwich:
    lower: float
    upper: float
    # the bounds are stated for N > M >= K >= 2; they are evaluated outside too
    in_stated_regime: bool


def sandwich_eval(params: SystemParams) -> Sandwich:
    """Computable envelope around the minimum long-term NDT.

    The unknown optimal offline NDT is replaced by its LP lower bound on the
    lower side and by the offline achievable NDT on the upper side; both
    substitutions keep the inequalities valid.
    """
    if params.r == 0:
        raise FronthaulRequired("the sandwich needs r > 0")
    q = params.K * params.p / params.N
    lower = (1 - q) / 2 * offline_lower_bound(params) + q * (1 + params.mu / params.r)
    upper = 2 * offline_achievable(params).serial_total + 4 / params.r
    M, K, N = params.M, params.K, params.N
    return Sandwich(lower, upper, N > M >= K >= 2)
