"""Parameter and result types shared by the analytic, bound and simulation code."""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass


class InvalidParams(ValueError):
    """A system parameter violates its validity range."""


class FronthaulRequired(ValueError):
    """A formula needs fronthaul transmission but the fronthaul rate is zero."""


class Infeasible(RuntimeError):
    """A linear program has an empty feasible region."""


class EmptyCache(RuntimeError):
    """Eviction was requested from a cache with no evictable entry."""


@dataclass(frozen=True)
class SystemParams:
    """Network and popularity parameters.

    M edge nodes serve K users per slot; the popular set holds N files;
    ``mu`` is the fractional cache capacity, ``r`` the fronthaul-to-wireless
    rate ratio, ``p`` the per-slot probability that a new file becomes
    popular and ``alpha`` the over-provisioning factor used by policies that
    do not know the popular set.
    """

    M: int
    K: int
    N: int
    mu: float
    r: float
    p: float
    alpha: float = 2.0

    def __post_init__(self):
        validate(self)

    @property
    def m(self) -> int:
        """min(M, K), the number of users that can be zero-forced jointly."""
        return min(self.M, self.K)

    def replace(self, **changes) -> "SystemParams":
        d = asdict(self)
        d.update(changes)
        return SystemParams(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def validate(params: SystemParams) -> SystemParams:
    """Return ``params`` unchanged if every constraint holds.

    Raises :class:`InvalidParams` naming the first violated constraint.
    """
    M, K, N = params.M, params.K, params.N
    for name, v in (("M", M), ("K", K), ("N", N)):
        if not _is_int(v) or v < 1:
            raise InvalidParams(f"{name} must be a positive integer, got {v!r}")
    if K > N:
        raise InvalidParams(f"K>N: need K <= N, got K={K}, N={N}")
    for name in ("mu", "r", "p", "alpha"):
        v = getattr(params, name)
        if not isinstance(v, (int, float)) or isinstance(v, bool) or math.isnan(v):
            raise InvalidParams(f"{name} must be a real number, got {v!r}")
    if not 0.0 <= params.mu <= 1.0:
        raise InvalidParams(f"mu must lie in [0, 1], got {params.mu}")
    if params.r < 0 or math.isinf(params.r):
        raise InvalidParams(f"r must be a finite non-negative real, got {params.r}")
    if not 0.0 <= params.p <= 1.0:
        raise InvalidParams(f"p must lie in [0, 1], got {params.p}")
    if not params.alpha > 1.0 or math.isinf(params.alpha):
        raise InvalidParams(f"alpha must be a finite real > 1, got {params.alpha}")
    return params


@dataclass(frozen=True)
class NdtPair:
    """Fronthaul and edge normalized delivery times of one delivery scheme."""

    delta_F: float
    delta_E: float

    @property
    def serial_total(self) -> float:
        return self.delta_F + self.delta_E

    @property
    def pipelined_total(self) -> float:
        return max(self.delta_F, self.delta_E)

    def mix(self, other: "NdtPair", weight: float) -> "NdtPair":
        """Time sharing: ``weight`` of the file with ``self``, the rest with ``other``."""
        return NdtPair(
            weight * self.delta_F + (1.0 - weight) * other.delta_F,
            weight * self.delta_E + (1.0 - weight) * other.delta_E,
        )


class SchemeKind(enum.Enum):
    EN_COOPERATION = "en_cooperation"
    EN_COORDINATION = "en_coordination"
    CRAN_TRANSMISSION = "cran_transmission"


class Eviction(enum.Enum):
    RANDOM = "random"
    LRU = "lru"
    FIFO = "fifo"


class PolicyFamily(enum.Enum):
    CRAN_ONLY = "cran_only"
    REACTIVE_KNOWN = "reactive_known"
    REACTIVE_ADAPTIVE_KNOWN = "reactive_adaptive_known"
    REACTIVE_UNKNOWN = "reactive_unknown"
    REACTIVE_PIPELINED = "reactive_pipelined"
    PROACTIVE_PIPELINED = "proactive_pipelined"


@dataclass(frozen=True)
class PolicyKind:
    """A caching/delivery policy.

    ``eviction`` is set only for ``REACTIVE_UNKNOWN``; ``known`` only matters
    for ``REACTIVE_PIPELINED`` (the unknown-set pipelined variant evicts at
    random).  Policies round-trip through their string form, e.g.
    ``"reactive_unknown:lru"`` or ``"reactive_pipelined:known"``.
    """

    family: PolicyFamily
    eviction: Eviction | None = None
    known: bool = True

    def __post_init__(self):
        if self.family is PolicyFamily.REACTIVE_UNKNOWN:
            if self.eviction is None:
                raise InvalidParams("reactive_unknown needs an eviction variant")
        elif self.eviction is not None:
            raise InvalidParams(f"{self.family.value} takes no eviction variant")

    @property
    def pipelined(self) -> bool:
        return self.family in (PolicyFamily.REACTIVE_PIPELINED, PolicyFamily.PROACTIVE_PIPELINED)

    @property
    def knows_popular_set(self) -> bool:
        if self.family is PolicyFamily.REACTIVE_UNKNOWN:
            return False
        if self.family is PolicyFamily.REACTIVE_PIPELINED:
            return self.known
        return True

    @property
    def cache_eviction(self) -> Eviction | None:
        """Eviction rule used when the cache is full (unknown-set policies only)."""
        if self.family is PolicyFamily.REACTIVE_UNKNOWN:
            return self.eviction
        if self.family is PolicyFamily.REACTIVE_PIPELINED and not self.known:
            return Eviction.RANDOM
        return None

    def __str__(self) -> str:
        if self.family is PolicyFamily.REACTIVE_UNKNOWN:
            return f"{self.family.value}:{self.eviction.value}"
        if self.family is PolicyFamily.REACTIVE_PIPELINED:
            return f"{self.family.value}:{'known' if self.known else 'unknown'}"
        return self.family.value

    @classmethod
    def parse(cls, text: str) -> "PolicyKind":
        name, _, arg = text.strip().lower().partition(":")
        try:
            family = PolicyFamily(name)
        except ValueError:
            raise InvalidParams(f"unknown policy {text!r}") from None
        if family is PolicyFamily.REACTIVE_UNKNOWN:
            try:
                return cls(family, Eviction(arg or "random"))
            except ValueError:
                raise InvalidParams(f"unknown eviction variant in {text!r}") from None
        if family is PolicyFamily.REACTIVE_PIPELINED:
            if arg not in ("", "known", "unknown"):
                raise InvalidParams(f"reactive_pipelined takes known|unknown, got {text!r}")
            return cls(family, known=(arg != "unknown"))
        if arg:
            raise InvalidParams(f"{family.value} takes no argument, got {text!r}")
        return cls(family)


CRAN_ONLY = PolicyKind(PolicyFamily.CRAN_ONLY)
REACTIVE_KNOWN = PolicyKind(PolicyFamily.REACTIVE_KNOWN)
REACTIVE_ADAPTIVE_KNOWN = PolicyKind(PolicyFamily.REACTIVE_ADAPTIVE_KNOWN)
PROACTIVE_PIPELINED = PolicyKind(PolicyFamily.PROACTIVE_PIPELINED)


def reactive_unknown(eviction: Eviction | str = Eviction.RANDOM) -> PolicyKind:
    return PolicyKind(PolicyFamily.REACTIVE_UNKNOWN, Eviction(eviction))


def reactive_pipelined(known: bool = True) -> PolicyKind:
    return PolicyKind(PolicyFamily.REACTIVE_PIPELINED, known=known)
