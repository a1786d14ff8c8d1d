"""Entropy of a stream: heavy hitters exactly, the remainder from a sample."""
import math
from collections import Counter

import numpy as np

from offerforge.rule_engine import estimate_entropy

rng = np.random.default_rng(5)
stream = (rng.zipf(1.1, size=100_000) % 20_000).tolist()

counts = Counter(stream)
n = len(stream)
exact = -sum(c / n * math.log2(c / n) for c in counts.values())
for sample_size in (500, 2000, 10_000):
    est = estimate_entropy(stream, epsilon=1e-3, phi=1e-2, sample_size=sample_size, seed=1)
    print(f"sample {sample_size:>6}: estimate {est:.4f} bits, exact {exact:.4f}, error {abs(est - exact) / exact:.2%}")
