"""Counting Bloom filter with double hashing.

Positions for an item are ``(h1 + i*h2) mod 2**64 mod m`` for ``i < k`` where
``h1`` is 64-bit FNV-1a of the item's bytes and ``h2`` is
``mix64(h1 ^ seed) | 1``. Counters that reach ``2**counter_bits - 1`` become
sticky: they are never decremented again, so no inserted item can turn into
a false negative.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyInput, NotPresent
from .lossy_counting import item_bytes
from .rng import MASK64, _mix64_array, fnv1a_64, fnv1a_64_rows, mix64


@dataclass(frozen=True)
class CbfConfig:
    m: int = 16384
    k: int = 7
    counter_bits: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.k < 1:
            raise ValueError("m and k must be >= 1")
        if not 1 <= self.counter_bits <= 32:
            raise ValueError("counter_bits must lie in 1..32")

    @property
    def counter_max(self) -> int:
        return (1 << self.counter_bits) - 1


def positions(item, config: CbfConfig) -> list[int]:
    h1 = fnv1a_64(item_bytes(item))
    h2 = mix64(h1 ^ (config.seed & MASK64)) | 1
    return [((h1 + i * h2) & MASK64) % config.m for i in range(config.k)]


def positions_rows(keys: np.ndarray, config: CbfConfig) -> np.ndarray:
    """Vectorized ``positions`` for equal-length byte keys given as a ``(n, L)`` uint8 array."""
    h1 = fnv1a_64_rows(keys)
    h2 = _mix64_array(h1 ^ np.uint64(config.seed & MASK64)) | np.uint64(1)
    steps = np.arange(config.k, dtype=np.uint64)
    return ((h1[:, None] + steps[None, :] * h2[:, None]) % np.uint64(config.m)).astype(np.int64)


def substream_id(item, num_streams: int, seed: int = 0) -> int:
    """Deterministic sub-stream in ``[0, num_streams)`` from the item's FNV-1a hash."""
    if num_streams < 1:
        raise ValueError("num_streams must be >= 1")
    return mix64(fnv1a_64(item_bytes(item)) ^ (seed & MASK64)) % num_streams


def fpr_estimate(n: int, m: int, k: int) -> float:
    if m < 1:
        raise ValueError("m must be >= 1")
    return (1.0 - math.exp(-k * n / m)) ** k


def chi_square_uniformity(observed_bin_counts: Sequence[int]) -> float:
    counts = np.asarray(observed_bin_counts, dtype=np.float64)
    if counts.size < 2:
        raise ValueError("need at least two bins")
    total = counts.sum()
    if total <= 0:
        raise EmptyInput("EmptyInput: no observations")
    expected = total / counts.size
    return float(((counts - expected) ** 2).sum() / expected)


class CountingBloomFilter:
    def __init__(self, config: CbfConfig = CbfConfig()):
        self.config = config
        self.counters = np.zeros(config.m, dtype=np.int64)
        self.n = 0
        self.saturated: set[int] = set()

    @property
    def supports_remove(self) -> bool:
        return self.config.counter_bits > 1

    def insert(self, item) -> None:
        top = self.config.counter_max
        for pos in positions(item, self.config):
            if self.counters[pos] < top:
                self.counters[pos] += 1
            if self.counters[pos] >= top:
                self.saturated.add(pos)
        self.n += 1

    def contains(self, item) -> bool:
        return all(self.counters[p] > 0 for p in positions(item, self.config))

    __contains__ = contains

    def remove(self, item) -> None:
        """Decrement the item's counters; the item must currently be inserted."""
        if not self.supports_remove:
            raise TypeError("a 1-bit filter cannot remove items")
        needed = Counter(p for p in positions(item, self.config) if p not in self.saturated)
        for pos, times in needed.items():
            if self.counters[pos] < times:
                raise NotPresent(f"NotPresent: {item!r} is not in the filter")
        for pos, times in needed.items():
            self.counters[pos] -= times
        self.n -= 1

    def snapshot(self) -> dict:
        c = self.config
        return {
            "m": c.m,
            "k": c.k,
            "counter_bits": c.counter_bits,
            "seed": c.seed,
            "n": self.n,
            "counters": self.counters.tolist(),
            "saturated": sorted(self.saturated),
        }

    def to_json(self) -> str:
        return json.dumps(self.snapshot())

    @classmethod
    def from_snapshot(cls, d: dict) -> "CountingBloomFilter":
        out = cls(CbfConfig(d["m"], d["k"], d["counter_bits"], d["seed"]))
        out.counters = np.asarray(d["counters"], dtype=np.int64)
        if out.counters.shape != (out.config.m,):
            raise ValueError("counter array length does not match m")
        out.n = d.get("n", 0)
        out.saturated = set(d["saturated"])
        return out

    @classmethod
    def from_json(cls, text: str) -> "CountingBloomFilter":
        return cls.from_snapshot(json.loads(text))


def insert_all(cbf: CountingBloomFilter, items: Iterable) -> None:
    for item in items:
        cbf.insert(item)
