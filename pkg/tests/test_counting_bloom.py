import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import chi2

from offerforge.counting_bloom import (
    CbfConfig, CountingBloomFilter, chi_square_uniformity, fpr_estimate, insert_all, positions, positions_rows,
    substream_id,
)
from offerforge.errors import EmptyInput, NotPresent
from offerforge.oracles import ExactMultiset
from offerforge.rng import fnv1a_64

from support import binomial_sigma


def test_positions_deterministic_and_k1():
    c = CbfConfig(m=1000, k=5, seed=3)
    assert positions("rule", c) == positions("rule", c)
    assert positions("rule", CbfConfig(m=1000, k=1)) == [fnv1a_64(b"rule") % 1000]


def test_positions_rows_match_scalar():
    keys = [b"abcd", b"rule", b"\x00\xff\x10\x01"]
    c = CbfConfig(m=977, k=6, seed=12345)
    arr = np.frombuffer(b"".join(keys), dtype=np.uint8).reshape(3, 4)
    assert positions_rows(arr, c).tolist() == [positions(k, c) for k in keys]


def test_fresh_filter_is_empty():
    f = CountingBloomFilter(CbfConfig(m=64, k=3))
    assert not f.counters.any() and "x" not in f


def test_insert_contains_and_double_insert():
    f = CountingBloomFilter(CbfConfig(m=4096, k=4))
    f.insert("x")
    assert f.contains("x")
    f.insert("x")
    assert all(f.counters[p] >= 2 for p in positions("x", f.config))


def test_remove_restores_empty_and_missing_raises():
    f = CountingBloomFilter(CbfConfig(m=4096, k=4))
    f.insert("x")
    f.remove("x")
    assert not f.counters.any() and "x" not in f
    with pytest.raises(NotPresent):
        CountingBloomFilter().remove("y")


def test_overlapping_items_keep_each_other():
    c = CbfConfig(m=16, k=3, seed=0)
    # chosen by search: share positions 6 and 12
    assert set(positions("i0", c)) & set(positions("i6", c)) == {6, 12}
    f = CountingBloomFilter(c)
    f.insert("i0")
    f.insert("i6")
    f.remove("i0")
    assert "i6" in f


def test_saturated_counters_are_sticky():
    f = CountingBloomFilter(CbfConfig(m=8, k=1, counter_bits=2))
    for _ in range(5):
        f.insert("a")
    (pos,) = positions("a", f.config)
    assert f.counters[pos] == 3 and pos in f.saturated
    for _ in range(5):
        f.remove("a")
    assert f.counters[pos] == 3 and "a" in f


def test_one_bit_mode_has_no_remove():
    f = CountingBloomFilter(CbfConfig(m=64, k=2, counter_bits=1))
    f.insert("a")
    assert "a" in f
    with pytest.raises(TypeError):
        f.remove("a")
    with pytest.raises(ValueError):
        CbfConfig(counter_bits=0)


def test_fpr_estimate():
    assert fpr_estimate(0, 100, 3) == 0
    assert fpr_estimate(50, 50, 1) == pytest.approx(1 - math.exp(-1))
    # closed form evaluated by hand: (1 - e^(-7000/16384))^7
    assert fpr_estimate(1000, 16384, 7) == pytest.approx(6.143e-4, rel=1e-3)


def test_empirical_fpr_and_no_false_negatives():
    f = CountingBloomFilter(CbfConfig(m=16384, k=7, seed=1))
    members = [f"member-{i}" for i in range(1000)]
    insert_all(f, members)
    assert all(m in f for m in members)
    probes = 100_000
    hits = sum(f"probe-{i}" in f for i in range(probes))
    p = fpr_estimate(1000, 16384, 7)
    assert abs(hits - probes * p) <= 3 * binomial_sigma(probes, p)


def test_chi_square_examples():
    assert chi_square_uniformity([4, 4, 4]) == 0
    assert chi_square_uniformity([10, 0]) == 10
    with pytest.raises(EmptyInput):
        chi_square_uniformity([0, 0])


def test_position_uniformity():
    rng = np.random.default_rng(5)
    keys = rng.integers(97, 123, size=(100_000, 12), dtype=np.uint8)
    pos = positions_rows(keys, CbfConfig(m=1024, k=7, seed=5))
    stat = chi_square_uniformity(np.bincount(pos.ravel(), minlength=1024))
    assert stat < chi2.ppf(0.99, 1023)


def test_substreams():
    assert {substream_id(f"x{i}", 1) for i in range(100)} == {0}
    assert substream_id("abc", 16, 7) == substream_id("abc", 16, 7)
    counts = np.bincount([substream_id(f"item-{i}", 16, 3) for i in range(100_000)], minlength=16)
    assert chi_square_uniformity(counts) < chi2.ppf(0.99, 15)


def test_snapshot_round_trip():
    f = CountingBloomFilter(CbfConfig(m=32, k=3, counter_bits=2, seed=9))
    insert_all(f, ["a", "a", "a", "b", "c"])
    again = CountingBloomFilter.from_json(f.to_json())
    assert again.to_json() == f.to_json()
    assert np.array_equal(again.counters, f.counters) and again.saturated == f.saturated


def test_serialized_size_independent_of_items():
    small, large = CountingBloomFilter(CbfConfig(m=64, k=3)), CountingBloomFilter(CbfConfig(m=64, k=3))
    small.insert("a")
    large.insert("a" * 10_000)
    assert len(small.to_json()) == len(large.to_json())


def op_sequences(alphabet, max_len):
    """Every insert/remove sequence obeying the remove contract, as (ops, multiset)."""
    stack = [((), ExactMultiset())]
    while stack:
        ops, present = stack.pop()
        yield ops, present
        if len(ops) == max_len:
            continue
        for x in alphabet:
            nxt = ExactMultiset()
            nxt.counts = dict(present.counts)
            nxt.insert(x)
            stack.append((ops + (("+", x),), nxt))
        for x in present.items():
            nxt = ExactMultiset()
            nxt.counts = dict(present.counts)
            nxt.remove(x)
            stack.append((ops + (("-", x),), nxt))


@pytest.mark.parametrize("config", [CbfConfig(m=8, k=3, counter_bits=2, seed=1), CbfConfig(m=5, k=2, counter_bits=3)])
def test_exhaustive_no_false_negatives(config):
    seen = 0
    for ops, present in op_sequences("abc", 7):
        f = CountingBloomFilter(config)
        for op, x in ops:
            f.insert(x) if op == "+" else f.remove(x)
        assert all(x in f for x in present.items())
        seen += 1
    assert seen > 10_000


@given(st.lists(st.text(min_size=1, max_size=6), max_size=30), st.text(min_size=1, max_size=6))
def test_insert_then_remove_restores_counters(items, extra):
    f = CountingBloomFilter(CbfConfig(m=256, k=4, seed=2))
    insert_all(f, items)
    before = f.counters.copy()
    f.insert(extra)
    if not f.saturated:
        f.remove(extra)
        assert np.array_equal(f.counters, before)
