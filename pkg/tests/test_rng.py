"""Project RNG: pinned algorithm, determinism, distribution sanity."""

import pytest
from hypothesis import given, strategies as st

from regulab.rng import SplitMix64


# Published splitmix64 outputs for seed 0 (Steele/Lea/Flood finalizer).
SEED0_STREAM = [
    0xE220A8397B1DCDAF,
    0x6E789E6AA1B965F4,
    0x06C45D188009454F,
    0xF88BB8A8724C81EC,
    0x1B39896A51A8749B,
]


def test_seed0_reference_stream():
    g = SplitMix64(0)
    assert [g.next_u64() for _ in range(5)] == SEED0_STREAM


def test_determinism_same_seed():
    a = SplitMix64(123456789)
    b = SplitMix64(123456789)
    assert [a.next_u64() for _ in range(1000)] == [b.next_u64() for _ in range(1000)]


def test_floats_in_unit_interval():
    g = SplitMix64(42)
    vals = [g.next_float() for _ in range(10_000)]
    assert all(0.0 <= v < 1.0 for v in vals)
    assert abs(sum(vals) / len(vals) - 0.5) < 0.02


def test_next_int_inclusive_bounds():
    g = SplitMix64(3)
    draws = [g.next_int(4, 10) for _ in range(5000)]
    assert min(draws) == 4
    assert max(draws) == 10


def test_next_below_rejects_nonpositive():
    with pytest.raises(ValueError):
        SplitMix64(0).next_below(0)


@given(st.lists(st.integers(), min_size=0, max_size=50), st.integers(0, 2**64 - 1))
def test_shuffle_is_permutation(items, seed):
    shuffled = list(items)
    SplitMix64(seed).shuffle(shuffled)
    assert sorted(shuffled) == sorted(items)


def test_split_streams_differ_from_parent():
    parent = SplitMix64(99)
    child = parent.split()
    a = [child.next_u64() for _ in range(50)]
    b = [parent.next_u64() for _ in range(50)]
    assert a != b


def test_split_deterministic():
    a = SplitMix64(5).split()
    b = SplitMix64(5).split()
    assert [a.next_u64() for _ in range(10)] == [b.next_u64() for _ in range(10)]
