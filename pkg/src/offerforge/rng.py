"""Seeded SplitMix64 generator and the 64-bit hash helpers built on it.

Every random decision in the package is drawn from :class:`SplitMix64` so a
run reproduces bit-for-bit from its seed. The generator is a Weyl counter
(``state += GAMMA``) followed by the SplitMix64 finalizer::

    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)

All arithmetic is modulo 2**64. ``random()`` maps an output ``x`` to
``(x >> 11) * 2**-53``.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3

_INV_2_53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & MASK64
    return h


def fnv1a_64_rows(keys: np.ndarray) -> np.ndarray:
    """FNV-1a over each row of a ``(n, length)`` uint8 array."""
    keys = np.asarray(keys, dtype=np.uint8)
    h = np.full(keys.shape[0], FNV_OFFSET, dtype=np.uint64)
    prime = np.uint64(FNV_PRIME)
    for col in range(keys.shape[1]):
        h = (h ^ keys[:, col].astype(np.uint64)) * prime
    return h


def derive_seed(seed: int, tag: str) -> int:
    """Per-module sub-seed: ``seed XOR fnv1a_64(tag)``."""
    return (seed ^ fnv1a_64(tag.encode("utf-8"))) & MASK64


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        return mix64(self.state)

    def random(self) -> float:
        return (self.next_u64() >> 11) * _INV_2_53

    def below(self, n: int) -> int:
        """Unbiased integer in ``[0, n)`` (Lemire's multiply-and-reject)."""
        if n <= 0:
            raise ValueError("n must be positive")
        product = self.next_u64() * n
        low = product & MASK64
        if low < n:
            threshold = ((1 << 64) - n) % n
            while low < threshold:
                product = self.next_u64() * n
                low = product & MASK64
        return product >> 64

    def u64_array(self, count: int) -> np.ndarray:
        """The next ``count`` outputs, identical to ``count`` calls of next_u64."""
        steps = np.arange(1, count + 1, dtype=np.uint64)
        states = np.uint64(self.state) + steps * np.uint64(GAMMA)
        self.state = (self.state + count * GAMMA) & MASK64
        return _mix64_array(states)

    def random_array(self, count: int) -> np.ndarray:
        out = self.u64_array(count) >> np.uint64(11)
        return out.astype(np.float64) * _INV_2_53
