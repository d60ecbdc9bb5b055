"""Markov popular-set process and per-slot request sampling.

All randomness is drawn as uniform doubles from a :class:`numpy.random.Generator`
(one ``rng.random()`` call per decision), so the compiled trace kernel in
:mod:`fogcache.sim` can replay exactly the same decisions from a pre-drawn
buffer of uniforms.
"""
from __future__ import annotations

import numpy as np

from .model import InvalidParams

GENERATOR_NAME = "numpy.random.PCG64"


def make_rng(seed: int, stream: int | None = None) -> np.random.Generator:
    """PCG64 generator; ``stream`` selects an independent substream of ``seed``."""
    key = () if stream is None else (int(stream),)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))


def uniform_index(u: float, n: int) -> int:
    """Map a uniform in [0, 1) to an index in [0, n)."""
    i = int(u * n)
    return i if i < n else n - 1


class PopularSet:
    """The N currently popular file ids, plus the next fresh id to hand out."""

    __slots__ = ("files", "next_id")

    def __init__(self, files, next_id: int | None = None):
        self.files = np.asarray(files, dtype=np.int64).copy()
        self.next_id = int(self.files.max()) + 1 if next_id is None else int(next_id)

    @classmethod
    def initial(cls, N: int) -> "PopularSet":
        return cls(np.arange(N, dtype=np.int64), N)

    @property
    def N(self) -> int:
        return len(self.files)

    def copy(self) -> "PopularSet":
        return PopularSet(self.files, self.next_id)

    def __contains__(self, file_id) -> bool:
        return bool(np.any(self.files == file_id))

    def __len__(self) -> int:
        return len(self.files)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PopularSet)
            and self.next_id == other.next_id
            and np.array_equal(self.files, other.files)
        )

    def __repr__(self) -> str:
        return f"PopularSet({self.files.tolist()}, next_id={self.next_id})"

    def check(self) -> None:
        if len(np.unique(self.files)) != len(self.files):
            raise AssertionError(f"duplicate ids in popular set {self.files}")
        if self.files.max(initial=-1) >= self.next_id:
            raise AssertionError("popular set holds an id not yet issued")


def step_popularity(popular: PopularSet, p: float, rng: np.random.Generator):
    """Advance the popular set by one slot.

    With probability ``p`` a uniformly chosen member is replaced by a fresh id.
    Returns ``(new_set, replaced, inserted)``; the two ids are ``None`` when
    nothing changed.  The input set is not modified.
    """
    new = popular.copy()
    if rng.random() >= p:
        return new, None, None
    idx = uniform_index(rng.random(), new.N)
    replaced = int(new.files[idx])
    inserted = new.next_id
    new.files[idx] = inserted
    new.next_id += 1
    return new, replaced, inserted


def draw_requests(popular: PopularSet, K: int, rng: np.random.Generator) -> np.ndarray:
    """K distinct ids drawn uniformly without replacement (partial Fisher-Yates)."""
    N = popular.N
    if K > N:
        raise InvalidParams(f"K>N: cannot draw {K} distinct requests from {N} files")
    perm = np.arange(N)
    for i in range(K):
        j = i + uniform_index(rng.random(), N - i)
        perm[i], perm[j] = perm[j], perm[i]
    return popular.files[perm[:K]].copy()
