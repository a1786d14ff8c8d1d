"""Promote frequent business rules, retire fading ones and assign offers."""
import random

from offerforge.customer_model import CustomerRecord, Offer, OfferStatus
from offerforge.rule_engine import RuleStreamState, assign_offer, parse_rule, process_event

night = parse_rule("age < 27 AND margin_amount > $30 AND night_sms_count > 100")
talk = parse_rule("age < 27 AND margin_amount < 10")
print("canonical id:", night.id)

state = RuleStreamState([night, talk], epsilon=0.01, phi=0.1, refresh_cadence=100)
rng = random.Random(0)
for i in range(10_000):
    fired = []
    if rng.random() < (0.3 if i < 2000 else 0.0):  # the talk rule stops firing after 2000 events
        fired.append(talk.id)
    if rng.random() < 0.25:
        fired.append(night.id)
    fired.append(f"rare-{rng.randrange(3000)}")
    process_event(state, fired)

for t in state.log:
    print(f"event {t.event_index}: {t.rule_id!r} {t.before} -> {t.after}")

catalog = [
    Offer("night_sms_100", "vas", {"free_night_sms": 100}, night.id),
    Offer("free_talk_50", "free_talk_time", {"minutes": 50}, talk.id),
]
customer = CustomerRecord(
    id="C1", age=22, gender="female", recency=3, frequency=12, monetary=30_000, margin_amount=4_500,
    churn_probability=0.1, days_since_last_upgrade=200, days_of_zero_usage=0,
    outgoing_call_minutes=40.0, night_sms_count=180, internet_mb=300.0,
)
print("offer for C1:", assign_offer(customer, state, catalog, OfferStatus.A))
