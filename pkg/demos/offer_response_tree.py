"""Grow and prune a Gini tree that predicts who accepts an offer."""
import numpy as np

from offerforge.cart import CartConfig, Sample, accuracy, grow_tree, predict, prune

rng = np.random.default_rng(3)
samples = []
for _ in range(300):
    young, heavy_sms, female = rng.random(3) < (0.4, 0.3, 0.5)
    # response mostly driven by an interaction plus noise
    p = 0.85 if young and heavy_sms else 0.15
    samples.append(Sample({"young": int(young), "heavy_sms": int(heavy_sms), "female": int(female)}, rng.random() < p))

full = grow_tree(samples, CartConfig(max_depth=4, min_samples_leaf=5))
pruned = prune(full, 0.01)
print(f"full tree {full.leaf_count()} leaves, accuracy {accuracy(full, samples):.3f}")
print(f"pruned tree {pruned.leaf_count()} leaves, accuracy {accuracy(pruned, samples):.3f}")
print(pruned.to_json())

label, p = predict(pruned, {"young": 1, "heavy_sms": 1, "female": 0})
print(f"young heavy SMS user: respond={label} (p={p:.2f})")
