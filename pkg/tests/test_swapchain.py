import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qinsim.model import BsmParams
from qinsim.swapchain import (
    ChainConfig,
    ScalingModel,
    SwapSchedule,
    SwapStrategy,
    build_swap_schedule,
    classify_scaling,
    memoryless_rate_hz,
    segment_chain,
    single_shot_e2e_prob,
)


def enumerate_success(ps, q):
    """Sum the probability of every outcome in which all segments and swaps succeed."""
    n = len(ps)
    total = 0.0
    for segs in itertools.product((0, 1), repeat=n):
        weight = math.prod(p if s else 1 - p for s, p in zip(segs, ps))
        for swaps in itertools.product((0, 1), repeat=n - 1):
            w = weight * math.prod(q if b else 1 - q for b in swaps)
            if all(segs) and all(swaps):
                total += w
    return total


# Frozen output of enumerate_success.
ENUMERATED = [
    ((0.1,), 0.5, 0.1),
    ((0.1, 0.1), 0.5, 0.005000000000000001),
    ((0.3, 0.05, 0.1), 0.25, 9.375e-05),
    ((0.2, 0.3, 0.4, 0.5), 0.5, 0.0015),
]


@pytest.mark.parametrize("ps, q, expected", ENUMERATED)
def test_single_shot_matches_enumeration(ps, q, expected):
    chain = ChainConfig(len(ps), ps, BsmParams(q), 1.0)
    assert single_shot_e2e_prob(chain) == pytest.approx(expected, rel=1e-12)
    assert enumerate_success(ps, q) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(ps=st.lists(st.floats(0, 1), min_size=1, max_size=4), q=st.floats(0, 0.5),
       v=st.floats(0, 1))
def test_single_shot_property(ps, q, v):
    chain = ChainConfig(len(ps), ps, BsmParams(q, v), 1.0)
    assert single_shot_e2e_prob(chain) == pytest.approx(
        enumerate_success(ps, q * v), abs=1e-15
    )


def test_rate_examples():
    one = ChainConfig(1, (1e-20,), BsmParams(), 1e10)
    assert memoryless_rate_hz(one) == pytest.approx(1e-10)
    two = ChainConfig(2, (0.1, 0.1), BsmParams(0.5), 1e9)
    assert memoryless_rate_hz(two) == pytest.approx(5e6)


def test_chain_config_checks():
    with pytest.raises(ValueError):
        ChainConfig(2, (0.1,), BsmParams(), 1.0)
    with pytest.raises(ValueError):
        ChainConfig(1, (1.2,), BsmParams(), 1.0)
    with pytest.raises(ValueError):
        ChainConfig(0, (), BsmParams(), 1.0)


def test_segment_chain():
    assert segment_chain(1000, 4) == [250.0] * 4
    with pytest.raises(ValueError):
        segment_chain(100, 0)


def test_schedules():
    bal = build_swap_schedule(4, "balanced")
    assert [sorted(r) for r in bal.rounds] == [[1, 3], [2, 4]]
    seq = build_swap_schedule(3, SwapStrategy.SEQUENTIAL)
    assert seq.firing_order() == [1, 2, 3]
    nested = build_swap_schedule(7, "nested")
    assert [sorted(r) for r in nested.rounds] == [[1, 3, 5, 7], [2, 6], [4]]
    assert build_swap_schedule(1).rounds == (frozenset({1}),)
    with pytest.raises(ValueError):
        build_swap_schedule(0)


def test_schedule_must_partition():
    with pytest.raises(ValueError):
        SwapSchedule((frozenset({1}), frozenset({1, 2})))
    with pytest.raises(ValueError):
        SwapSchedule((frozenset({1, 3}),))


def test_reach():
    assert build_swap_schedule(4, "balanced").reach() == {
        1: (0, 2), 3: (2, 4), 2: (0, 4), 4: (2, 5)
    }
    assert build_swap_schedule(3, "nested").reach() == {1: (0, 2), 3: (2, 4), 2: (0, 4)}
    assert build_swap_schedule(3, "sequential").reach() == {1: (0, 2), 2: (0, 3), 3: (0, 4)}


@given(n=st.integers(1, 64), strategy=st.sampled_from(list(SwapStrategy)))
def test_schedule_properties(n, strategy):
    sched = build_swap_schedule(n, strategy)
    assert sorted(sched.firing_order()) == list(range(1, n + 1))
    rounds = sched.round_of()
    for j, (lo, hi) in sched.reach().items():
        assert 0 <= lo < j < hi <= n + 1
        assert all(rounds[k] < rounds[j] for k in range(lo + 1, hi) if k != j)
    if strategy is SwapStrategy.NESTED:
        assert len(sched.rounds) == n.bit_length()


def test_classify_exponential():
    d = np.array([100, 200, 300, 400, 500, 600.0])
    rates = 1e9 * 10 ** (-0.2 * d / 10)
    fit = classify_scaling(d, rates)
    assert fit.model is ScalingModel.EXPONENTIAL
    assert fit.decay_db_per_km == pytest.approx(0.2)


def test_classify_polynomial():
    d = np.array([100, 200, 400, 800, 1600.0])
    fit = classify_scaling(d, 1e6 * d**-1.5)
    assert fit.model is ScalingModel.POLYNOMIAL
    assert fit.exponent == pytest.approx(-1.5)


def test_classify_constant_is_a_tie():
    fit = classify_scaling([1, 2, 3, 4], [5.0] * 4)
    assert fit.model is ScalingModel.POLYNOMIAL


def test_classify_rejects_bad_input():
    with pytest.raises(ValueError):
        classify_scaling([1, 2, 3], [1, 1, 1])
    with pytest.raises(ValueError):
        classify_scaling([1, 2, 3, 4], [1, 0, 1, 1])
    with pytest.raises(ValueError):
        classify_scaling([1, 3, 2, 4], [1, 1, 1, 1])


@settings(max_examples=100, deadline=None)
@given(alpha=st.floats(0.05, 1.0), start=st.floats(10, 200), step=st.floats(10, 200))
def test_classify_recovers_exponential(alpha, start, step):
    d = start + step * np.arange(6)
    fit = classify_scaling(d, 10 ** (-alpha * d / 10))
    assert fit.model is ScalingModel.EXPONENTIAL
    assert fit.decay_db_per_km == pytest.approx(alpha, rel=1e-6)
