"""RFM codes, lifetime value and GA segmentation on a synthetic population."""
import tempfile
from pathlib import Path

from offerforge.customer_model import load_customers
from offerforge.ga_segmentation import GaConfig, evolve
from offerforge.ltv_model import CampaignStrategy, LtvParams, lifetime_value
from offerforge.pipeline import SyntheticSpec, cmd_gen_data
from offerforge.rfm_codec import compute_boundaries, encode_customer, to_binary

with tempfile.TemporaryDirectory() as tmp:
    cmd_gen_data(SyntheticSpec(n_customers=200, seed=1), Path(tmp))
    customers = load_customers(Path(tmp) / "customers.csv")

bounds = compute_boundaries(customers)
c = customers[0]
code = encode_customer(c, bounds)
print(f"{c.id}: recency {c.recency}, frequency {c.frequency} -> {code} = {to_binary(code)}")

params = LtvParams(horizon_periods=12, discount_rate=0.01, base_retention=0.95, segment_cost=5000)
campaign = CampaignStrategy("retention-q3", "retention")
print(f"{c.id} lifetime value: {lifetime_value(c, params, campaign) / 100:.2f}")

result = evolve(GaConfig(population_size=100, max_generations=200, elitism_count=2, rng_seed=1),
                customers, params, campaign)
seg = result.segmentation
print(f"{seg.segment_count} segments, targeting {sorted(seg.targeted)}; fitness {result.best_fitness / 100:.2f}")
for gen, best, mean in result.history[::50]:
    print(f"  generation {gen:>3}: best {best / 100:>10.2f}  mean {mean / 100:>10.2f}")
