"""Stream entropy from heavy hitters plus a sampled residual.

Heavy hitters found by LossyCounting contribute ``(f/n) log2(n/f)`` directly,
using their lower-bound counts. The rest of the stream (the residual) is
handled with the classic telescoping estimator: for a residual position
whose item occurs ``r`` times from there to the end of the residual,
``n_res * (g(r) - g(r - 1))`` with ``g(x) = (x/n) log2(n/x)`` is an unbiased
estimate of the residual's contribution. Positions are drawn by reservoir
sampling; when the residual fits in the sample the result is exact.
"""
from __future__ import annotations

import math
from typing import Iterable

from ..errors import PhiTooSmall
from ..lossy_counting import LossyCounter
from ..rng import SplitMix64


def reservoir_sample(population_size: int, sample_size: int, rng: SplitMix64) -> list[int]:
    """Algorithm R over ``range(population_size)``."""
    reservoir = list(range(min(sample_size, population_size)))
    for i in range(sample_size, population_size):
        j = rng.below(i + 1)
        if j < sample_size:
            reservoir[j] = i
    return reservoir


def estimate_entropy(stream: Iterable, epsilon: float, phi: float, sample_size: int = 10_000, seed: int = 0) -> float:
    if not phi > epsilon:
        raise PhiTooSmall(f"PhiTooSmall: phi={phi} must exceed epsilon={epsilon}")
    if sample_size < 1:
        raise ValueError("sample_size must be >= 1")
    items = list(stream)
    n = len(items)
    if n == 0:
        return 0.0
    sketch = LossyCounter(epsilon)
    sketch.observe_many(items)
    heavy = {item: f for item, f, _ in sketch.heavy_hitters(phi)}
    h = sum((f / n) * math.log2(n / f) for f in heavy.values())

    residual = [x for x in items if x not in heavy]
    n_res = len(residual)
    if n_res == 0:
        return h
    # occurrences of residual[i] at or after position i
    remaining = [0] * n_res
    tally: dict = {}
    for i in range(n_res - 1, -1, -1):
        tally[residual[i]] = tally.get(residual[i], 0) + 1
        remaining[i] = tally[residual[i]]

    def g(x: int) -> float:
        return (x / n) * math.log2(n / x) if x else 0.0

    picks = reservoir_sample(n_res, sample_size, SplitMix64(seed))
    total = sum(g(remaining[i]) - g(remaining[i] - 1) for i in picks)
    return h + n_res * total / len(picks)
