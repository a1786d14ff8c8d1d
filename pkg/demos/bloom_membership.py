"""A counting Bloom filter: membership with deletion, and its false positive rate."""
from offerforge.counting_bloom import CbfConfig, CountingBloomFilter, fpr_estimate
from offerforge.errors import NotPresent

config = CbfConfig(m=16384, k=7, counter_bits=4, seed=42)
cbf = CountingBloomFilter(config)
for i in range(1000):
    cbf.insert(f"rule-{i}")

print("rule-7 present:", "rule-7" in cbf)
cbf.remove("rule-7")
print("rule-7 after remove:", "rule-7" in cbf)

try:
    cbf.remove("never-added")
except NotPresent as exc:
    print("remove of an absent item refused:", exc)

probes = 50_000
hits = sum(f"probe-{i}" in cbf for i in range(probes))
print(f"false positives {hits / probes:.2e}, closed form {fpr_estimate(999, config.m, config.k):.2e}")
print(f"snapshot is {len(cbf.to_json())} bytes whatever the items")
