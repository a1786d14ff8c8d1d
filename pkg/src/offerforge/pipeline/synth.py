"""Deterministic synthetic datasets for demos and end-to-end runs.

A generated directory holds customers, offer events, billing statements,
a rules file, an offer catalog, a rule-firing event stream, an item stream
for entropy estimation and a ``config.json`` wired to all of them. Two
customer profiles are planted so that the example rules below fire often.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from ..customer_model import (
    CustomerRecord, EventStatus, OfferEvent, customers_csv, from_day, offer_events_csv, to_day,
)
from ..errors import ConfigError
from ..keyword_extraction import extract_keywords, load_dictionary
from ..rule_engine import match, parse_rule
from .config import write_atomic

NIGHT_SMS_RULE = "age < 27 AND margin_amount > 30 AND night_sms_count > 100"
SOCIAL_RULE = "age < 24 AND margin_amount < 10 AND outgoing_call_minutes < 25 AND internet_mb > 500"

# (rule text, offer) pairs written to rules.txt and offers.json
EXAMPLE_RULES = [
    (NIGHT_SMS_RULE, {"id": "night_sms_100", "kind": "vas", "parameters": {"free_night_sms": 100}}),
    (SOCIAL_RULE, {"id": "social_media_month", "kind": "vas", "parameters": {"upfront_fee": 10, "months": 1}}),
    ("age < 27 AND margin_amount < 10", {"id": "free_talk_50", "kind": "free_talk_time", "parameters": {"minutes": 50}}),
    ("churn_probability > 0.4 AND days_of_zero_usage > 3",
     {"id": "retention_talk_50", "kind": "free_talk_time", "parameters": {"minutes": 50}}),
    ("margin_amount > 20 AND days_since_last_upgrade > 180",
     {"id": "upgrade_postpaid", "kind": "upgrade", "parameters": {"max_late_fees": 0, "lookback_months": 6}}),
    ("frequency > 8 AND monetary > 150",
     {"id": "paid_talk_100", "kind": "paid_talk_time", "parameters": {"minutes": 100, "upfront_fee": 10}}),
    ("night_sms_count > 60", {"id": "nat_sms_150", "kind": "discount_package", "parameters": {"free_sms": 150}}),
]

STATEMENT_LINES = [
    "Voice calls - outgoing local to Airtel mobile",
    "Voice calls - outgoing local to other mobiles",
    "Voice calls - outgoing local to fixed landline",
    "Voice calls - outgoing STD to Airtel mobile",
    "Voice calls - outgoing STD to other mobiles",
    "Voice calls - outgoing STD to fixed landline",
    "Voice calls – outgoing ISD",
    "Value Added Services: SMS – local to other mobiles",
    "Value Added Services: SMS – national to Airtel mobiles",
    "CUG",
]


@dataclass(frozen=True)
class SyntheticSpec:
    n_customers: int = 200
    seed: int = 0
    age_min: int = 18
    age_max: int = 70
    as_of: str = "2024-06-30"
    night_sms_share: float = 0.2
    social_share: float = 0.1
    late_fee_share: float = 0.25
    loss_share: float = 0.8
    n_events: int = 2000
    n_stream_items: int = 20000
    zipf_exponent: float = 1.1

    def __post_init__(self):
        if self.n_customers < 0 or self.n_events < 0 or self.n_stream_items < 0:
            raise ConfigError("counts in the synthetic spec must be >= 0")
        if not 0 <= self.age_min <= self.age_max:
            raise ConfigError("need 0 <= age_min <= age_max")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SyntheticSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown synthetic spec keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def _statement(rng: np.random.Generator, as_of: int, late_fee: bool) -> list[str]:
    lines = []
    for _ in range(int(rng.integers(3, 8))):
        day = as_of - int(rng.integers(0, 365))
        lines.append((day, STATEMENT_LINES[int(rng.integers(len(STATEMENT_LINES)))]))
    if rng.random() < 0.3:
        lines.append((as_of - int(rng.integers(0, 365)), f"{int(rng.choice([100, 150, 200]))} nat sms free"))
    if late_fee:
        lines.append((as_of - int(rng.integers(0, 365)), "Last bill period late fee"))
    lines.sort()
    return [f"{from_day(d).isoformat()} {text}" for d, text in lines]


def _customer(rng: np.random.Generator, index: int, spec: SyntheticSpec, dictionary, as_of: int):
    profile = rng.random()
    lo, hi = spec.age_min, spec.age_max
    age = int(rng.integers(lo, hi + 1))
    margin = float(rng.lognormal(3.0, 0.6))
    night_sms = int(rng.poisson(25))
    internet = float(rng.lognormal(5.0, 0.8))
    outgoing = float(rng.gamma(2.0, 60.0))
    if profile < spec.night_sms_share:
        age = int(rng.integers(lo, min(26, hi) + 1))
        margin = float(rng.uniform(31, 80))
        night_sms = int(rng.integers(101, 300))
    elif profile < spec.night_sms_share + spec.social_share:
        age = int(rng.integers(lo, min(23, hi) + 1))
        margin = float(rng.uniform(1, 9.9))
        outgoing = float(rng.uniform(0, 24))
        internet = float(rng.uniform(600, 3000))
    recency = int(rng.exponential(40))
    frequency = int(rng.poisson(8))
    if recency > 45 and frequency < 8 and rng.random() < spec.loss_share:
        # lapsing, infrequent customers who cost more than they bring in
        margin = -float(rng.uniform(5, 40))
    lines = _statement(rng, as_of, rng.random() < spec.late_fee_share)
    hits = extract_keywords(lines, dictionary)
    record = CustomerRecord(
        id=f"C{index:05d}",
        age=age,
        gender="male" if rng.random() < 0.5 else "female",
        recency=recency,
        frequency=frequency,
        monetary=int(round(rng.lognormal(5.0, 0.7) * 100)),
        margin_amount=int(round(margin * 100)),
        churn_probability=round(float(rng.beta(2, 5)), 3),
        days_since_last_upgrade=int(rng.integers(0, 1000)),
        days_of_zero_usage=int(rng.poisson(3)),
        outgoing_call_minutes=round(outgoing, 1),
        night_sms_count=night_sms,
        internet_mb=round(internet, 1),
        keywords=frozenset(h.keyword for h in hits if h.date is None),
        keyword_dates=tuple((h.keyword, h.date) for h in hits if h.date is not None),
    )
    return record, lines


def generate(spec: SyntheticSpec, out_dir) -> dict[str, Path]:
    """Write the synthetic dataset to ``out_dir``; returns the written paths."""
    out = Path(out_dir)
    rng = np.random.default_rng(spec.seed)
    as_of = to_day(spec.as_of)
    dictionary = load_dictionary()
    customers, statements = [], {}
    for i in range(spec.n_customers):
        record, lines = _customer(rng, i, spec, dictionary, as_of)
        customers.append(record)
        statements[record.id] = lines

    offers = [offer for _, offer in EXAMPLE_RULES]
    events = {}
    for c in customers:
        history = []
        for _ in range(int(rng.integers(0, 4))):
            offer = offers[int(rng.integers(len(offers)))]["id"]
            day = as_of - int(rng.integers(0, 270))
            status = [EventStatus.QUALIFIED, EventStatus.REJECTED, EventStatus.ACCEPTED][int(rng.integers(3))]
            history.append(OfferEvent(offer, day, status))
        if history:
            events[c.id] = sorted(history, key=lambda e: (e.date, e.offer_id))

    rules = [parse_rule(text) for text, _ in EXAMPLE_RULES]
    fire_lines = []
    for e in range(spec.n_events if customers else 0):
        c = customers[int(rng.integers(len(customers)))]
        fired = [r.id for r in rules if match(r, c)]
        fire_lines.append(json.dumps({"event_id": e, "customer_id": c.id, "fired_rule_ids": fired}))

    stream = rng.zipf(spec.zipf_exponent, spec.n_stream_items)

    paths = {
        "customers": out / "customers.csv",
        "offer_events": out / "offer_events.csv",
        "rules": out / "rules.txt",
        "catalog": out / "offers.json",
        "events": out / "events.jsonl",
        "entropy_stream": out / "entropy_stream.txt",
        "config": out / "config.json",
    }
    write_atomic(paths["customers"], customers_csv(customers))
    write_atomic(paths["offer_events"], offer_events_csv(events))
    (out / "statements").mkdir(parents=True, exist_ok=True)
    for cid, lines in statements.items():
        write_atomic(out / "statements" / f"{cid}.txt", "\n".join(lines) + "\n")
    write_atomic(paths["rules"], "# generated example rules\n" + "".join(f"{r.id}\n" for r in rules))
    catalog = [dict(offer, eligibility_rule_id=rule.id) for rule, (_, offer) in zip(rules, EXAMPLE_RULES)]
    write_atomic(paths["catalog"], json.dumps(catalog, indent=1) + "\n")
    write_atomic(paths["events"], "".join(line + "\n" for line in fire_lines))
    write_atomic(paths["entropy_stream"], "".join(f"{int(x)}\n" for x in stream))
    write_atomic(paths["config"], json.dumps(default_run_config(spec), indent=1) + "\n")
    return paths


def default_run_config(spec: SyntheticSpec) -> dict:
    return {
        "seed": spec.seed,
        "as_of": spec.as_of,
        "paths": {
            "customers": "customers.csv",
            "offer_events": "offer_events.csv",
            "statements": "statements",
            "rules": "rules.txt",
            "catalog": "offers.json",
            "output": "out",
        },
        "ga": {"population_size": 100, "max_generations": 200, "stagnation_limit": 0,
               "crossover_rate": 0.7, "mutation_rate": 0.01, "elitism_count": 2},
        "ltv": {"horizon_periods": 12, "discount_rate": 0.01, "base_retention": 0.95,
                "campaign_uplift": {"retention-q3": 1.1}, "segment_cost": 5000},
        "cart": {"max_depth": 4, "min_samples_leaf": 5, "pruning_alpha": 0.005},
        "stream": {"epsilon": 0.01, "phi": 0.1},
        "cbf": {"m": 4096, "k": 5, "counter_bits": 4},
        "campaign": {"id": "retention-q3", "objective": "retention"},
    }
