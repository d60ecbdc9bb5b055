import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fogcache.model import InvalidParams
from fogcache.popularity import PopularSet, draw_requests, make_rng, step_popularity


def test_no_change_at_p0():
    rng = make_rng(1)
    s = PopularSet.initial(10)
    for _ in range(100):
        new, replaced, inserted = step_popularity(s, 0.0, rng)
        assert replaced is None and inserted is None
        assert new == s


def test_always_change_at_p1():
    rng = make_rng(2)
    s = PopularSet.initial(10)
    seen = set(s.files.tolist())
    for _ in range(50):
        new, replaced, inserted = step_popularity(s, 1.0, rng)
        assert replaced in s and inserted not in seen
        assert inserted in new and replaced not in new
        seen.add(inserted)
        s = new


def test_step_does_not_mutate_input():
    s = PopularSet.initial(5)
    before = s.copy()
    step_popularity(s, 1.0, make_rng(3))
    assert s == before


def test_replacement_frequency():
    rng = make_rng(4)
    s = PopularSet.initial(20)
    changes = 0
    for _ in range(100_000):
        s, replaced, _ = step_popularity(s, 0.3, rng)
        changes += replaced is not None
    assert abs(changes / 100_000 - 0.3) < 0.01


def test_replaced_member_is_uniform():
    rng = make_rng(5)
    counts = np.zeros(4)
    s = PopularSet.initial(4)
    for _ in range(40_000):
        new, replaced, _ = step_popularity(s, 1.0, rng)
        counts[int(np.flatnonzero(s.files == replaced)[0])] += 1
    assert np.allclose(counts / counts.sum(), 0.25, atol=0.01)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 30), st.floats(0, 1), st.integers(0, 2**32 - 1), st.integers(1, 200))
def test_set_stays_distinct(N, p, seed, steps):
    rng = make_rng(seed)
    s = PopularSet.initial(N)
    for _ in range(steps):
        s, _, _ = step_popularity(s, p, rng)
        s.check()
        assert len(s) == N


def test_full_draw_is_permutation():
    s = PopularSet.initial(7)
    d = draw_requests(s, 7, make_rng(6))
    assert sorted(d.tolist()) == list(range(7))


def test_single_request_uniform():
    rng = make_rng(7)
    s = PopularSet.initial(5)
    counts = np.bincount([draw_requests(s, 1, rng)[0] for _ in range(50_000)], minlength=5)
    assert np.allclose(counts / 50_000, 0.2, atol=0.01)


def test_marginal_request_frequency():
    rng = make_rng(8)
    s = PopularSet.initial(20)
    counts = np.zeros(20)
    for _ in range(100_000):
        counts[draw_requests(s, 5, rng)] += 1
    assert np.all(np.abs(counts / 100_000 - 0.25) < 0.01)


def test_requests_distinct_and_popular():
    rng = make_rng(9)
    s = PopularSet([3, 9, 14, 27, 31], next_id=40)
    for _ in range(200):
        d = draw_requests(s, 3, rng)
        assert len(set(d.tolist())) == 3
        assert all(x in s for x in d)


def test_too_many_requests():
    with pytest.raises(InvalidParams, match="K>N"):
        draw_requests(PopularSet.initial(3), 4, make_rng(0))


def test_seeded_reproducibility():
    def trace(seed):
        rng = make_rng(seed, 3)
        s = PopularSet.initial(10)
        out = []
        for _ in range(100):
            s, _, _ = step_popularity(s, 0.5, rng)
            out.append(draw_requests(s, 4, rng).tolist())
        return out

    assert trace(11) == trace(11)
    assert trace(11) != trace(12)
