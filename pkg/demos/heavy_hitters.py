"""Find the most frequent items of a skewed stream with bounded memory."""
import numpy as np

from offerforge.lossy_counting import LossyCounter, space_bound

rng = np.random.default_rng(0)
stream = rng.zipf(1.3, size=200_000) % 5000  # skewed item ids

sketch = LossyCounter(epsilon=0.001)
sketch.observe_many(stream.tolist())
print(f"{sketch.n} items seen, {len(sketch)} counters kept "
      f"(bound {space_bound(0.001, sketch.n):.0f}, distinct {len(np.unique(stream))})")

# lower bound, upper bound, true count
true = np.bincount(stream)
for item, lower, upper in sketch.heavy_hitters(phi=0.02):
    print(f"item {item:>4}: {lower} <= {true[item]} <= {upper}")
