"""Naive reference implementations used to check the fast paths.

Nothing here imports the modules it checks: exact counting, exhaustive split
search, exhaustive target-subset search, exact entropy and an exact multiset.
They are slow on purpose.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction


class ExactCounter:
    def __init__(self, items=()):
        self.counts: dict = {}
        self.n = 0
        for item in items:
            self.add(item)

    def add(self, item, times: int = 1) -> None:
        self.counts[item] = self.counts.get(item, 0) + times
        self.n += times

    def count(self, item) -> int:
        return self.counts.get(item, 0)


def exact_heavy_hitters(counter: ExactCounter, phi: float) -> list[tuple[object, int]]:
    """Items with count >= phi * n, most frequent first."""
    hits = [(item, c) for item, c in counter.counts.items() if c >= phi * counter.n]
    return sorted(hits, key=lambda ic: (-ic[1], str(ic[0])))


def exact_entropy(counter: ExactCounter) -> float:
    """Shannon entropy in bits of the empirical distribution."""
    n = counter.n
    return -sum((c / n) * math.log2(c / n) for c in counter.counts.values() if c)


def _gini_of(labels) -> Fraction:
    n = len(labels)
    ones = sum(1 for x in labels if x)
    return 1 - Fraction(ones, n) ** 2 - Fraction(n - ones, n) ** 2


def exhaustive_best_split(samples, min_samples_leaf: int = 1, min_impurity_decrease: float = 0.0):
    """(feature index, threshold, exact decrease) by trying every midpoint, or None.

    ``samples`` are ``(feature_vector, label)`` pairs. Ties go to the lowest
    feature index, then the lowest threshold.
    """
    rows = [(list(x), bool(y)) for x, y in samples]
    labels = [y for _, y in rows]
    parent = _gini_of(labels)
    if parent == 0:
        return None
    n = len(rows)
    candidates = []
    for j in range(len(rows[0][0])):
        values = sorted({x[j] for x, _ in rows})
        for lo, hi in zip(values, values[1:]):
            t = (lo + hi) / 2
            left = [y for x, y in rows if x[j] <= t]
            right = [y for x, y in rows if x[j] > t]
            if len(left) < min_samples_leaf or len(right) < min_samples_leaf:
                continue
            child = Fraction(len(left), n) * _gini_of(left) + Fraction(len(right), n) * _gini_of(right)
            candidates.append((parent - child, j, t))
    if not candidates:
        return None
    decrease, j, t = min(candidates, key=lambda c: (-c[0], c[1], c[2]))
    if decrease < min_impurity_decrease:
        return None
    return j, t, decrease


def exhaustive_best_targets(segment_values: dict, cost_per_segment: int = 0):
    """Best (subset, value) over all 2**S target subsets of the segments."""
    segments = sorted(segment_values)
    best = (frozenset(), 0)
    for r in range(1, len(segments) + 1):
        for subset in itertools.combinations(segments, r):
            value = sum(segment_values[s] for s in subset) - cost_per_segment * len(subset)
            if value > best[1]:
                best = (frozenset(subset), value)
    return best


class ExactMultiset:
    """Membership with multiplicity; the oracle for counting Bloom filters."""

    def __init__(self):
        self.counts: dict = {}

    def insert(self, item) -> None:
        self.counts[item] = self.counts.get(item, 0) + 1

    def remove(self, item) -> None:
        if not self.counts.get(item):
            raise KeyError(item)
        self.counts[item] -= 1
        if not self.counts[item]:
            del self.counts[item]

    def __contains__(self, item) -> bool:
        return self.counts.get(item, 0) > 0

    def items(self):
        return list(self.counts)
