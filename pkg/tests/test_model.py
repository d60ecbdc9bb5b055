import pytest
from hypothesis import given
from hypothesis import strategies as st

from fogcache.model import (
    Eviction,
    InvalidParams,
    NdtPair,
    PolicyFamily,
    PolicyKind,
    SystemParams,
    reactive_unknown,
    validate,
)


def test_reference_parameters_are_valid(ref_params):
    assert validate(ref_params) is ref_params


@pytest.mark.parametrize(
    "kwargs, field",
    [
        (dict(M=2, K=3, N=2), "K>N"),
        (dict(alpha=1.0), "alpha"),
        (dict(alpha=0.5), "alpha"),
        (dict(r=-0.1), "r"),
        (dict(mu=1.5), "mu"),
        (dict(p=-0.01), "p"),
        (dict(M=0), "M"),
        (dict(K=2.0), "K"),
    ],
)
def test_invalid_params_name_the_constraint(kwargs, field):
    base = dict(M=10, K=5, N=20, mu=0.1, r=0.2, p=0.5, alpha=2.0)
    base.update(kwargs)
    with pytest.raises(InvalidParams, match=field):
        SystemParams(**base)


def test_zero_fronthaul_is_admitted():
    assert SystemParams(4, 3, 5, 1.0, 0.0, 0.0).r == 0.0


valid_params = st.builds(
    lambda M, K, extra, mu, r, p, a: SystemParams(M, K, K + extra, mu, r, p, a),
    st.integers(1, 12), st.integers(1, 8), st.integers(0, 10),
    st.floats(0, 1), st.floats(0, 50), st.floats(0, 1), st.floats(1.001, 10),
)


@given(valid_params)
def test_validate_idempotent(params):
    assert validate(validate(params)) == params


@given(st.floats(0, 1e6), st.floats(0, 1e6))
def test_pair_totals(a, b):
    pair = NdtPair(a, b)
    assert pair.pipelined_total <= pair.serial_total <= 2 * pair.pipelined_total


@pytest.mark.parametrize(
    "text",
    ["cran_only", "reactive_known", "reactive_adaptive_known", "reactive_unknown:random",
     "reactive_unknown:lru", "reactive_unknown:fifo", "reactive_pipelined:known",
     "reactive_pipelined:unknown", "proactive_pipelined"],
)
def test_policy_round_trip(text):
    assert str(PolicyKind.parse(text)) == text
    assert PolicyKind.parse(str(PolicyKind.parse(text))) == PolicyKind.parse(text)


def test_only_unknown_reactive_carries_eviction():
    assert reactive_unknown("lru").eviction is Eviction.LRU
    with pytest.raises(InvalidParams):
        PolicyKind(PolicyFamily.REACTIVE_KNOWN, Eviction.LRU)
    with pytest.raises(InvalidParams):
        PolicyKind(PolicyFamily.REACTIVE_UNKNOWN)
    with pytest.raises(InvalidParams):
        PolicyKind.parse("reactive_unknown:clock")
    assert PolicyKind.parse("reactive_pipelined:unknown").cache_eviction is Eviction.RANDOM
