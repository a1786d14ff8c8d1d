"""Candidate rule generation from a campaign's parameters.

Each numeric attribute contributes ``attr <= bp`` and ``attr > bp`` for its
quintile breakpoints; ``gender`` contributes its two values. Conjunctions of
up to ``max_length`` predicates on distinct attributes are kept when at
least ``min_support`` customers match.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from decimal import Decimal

import numpy as np

from ..customer_model import CURRENCY_FIELDS, MINOR_PER_MAJOR
from ..ltv_model import CampaignStrategy, Objective
from ..rfm_codec import percentile_breakpoints
from .dsl import ENUM_ATTRIBUTES, Predicate, Rule, holds

CAMPAIGN_ATTRIBUTES = {
    Objective.RETENTION: ("churn_probability", "days_since_last_upgrade", "days_of_zero_usage"),
    Objective.REVENUE_MAXIMIZATION: ("margin_amount", "outgoing_call_minutes", "internet_mb", "night_sms_count"),
    Objective.UPGRADE: ("days_since_last_upgrade", "margin_amount", "monetary"),
}
DEMOGRAPHICS = ("age", "gender")


@dataclass(frozen=True)
class CandidateConfig:
    max_length: int = 2
    min_support: int = 1
    attributes: tuple[str, ...] | None = None  # overrides the campaign defaults

    def __post_init__(self):
        if self.max_length < 1:
            raise ValueError("max_length must be >= 1")


def campaign_attributes(campaign: CampaignStrategy, config: CandidateConfig) -> tuple[str, ...]:
    if config.attributes is not None:
        return tuple(config.attributes)
    return CAMPAIGN_ATTRIBUTES[campaign.objective] + DEMOGRAPHICS


def predicate_pool(customers, attributes) -> list[Predicate]:
    pool = []
    for attr in attributes:
        if attr in ENUM_ATTRIBUTES:
            pool.extend(Predicate(attr, "=", v) for v in ENUM_ATTRIBUTES[attr])
            continue
        values = [getattr(c, attr) for c in customers]
        if attr in CURRENCY_FIELDS:
            values = [v / MINOR_PER_MAJOR for v in values]
        cuts = sorted({Decimal(str(round(bp, 2))) for bp in percentile_breakpoints(values)}) if values else []
        for bp in cuts:
            pool.append(Predicate(attr, "<=", bp))
            pool.append(Predicate(attr, ">", bp))
    return pool


def generate_candidate_rules(campaign: CampaignStrategy, customers, config: CandidateConfig = CandidateConfig()) -> list[Rule]:
    customers = list(customers)
    pool = predicate_pool(customers, campaign_attributes(campaign, config))
    masks = [np.array([holds(p, c) for c in customers], dtype=bool) for p in pool]
    seen = {}
    for length in range(1, config.max_length + 1):
        for combo in itertools.combinations(range(len(pool)), length):
            attrs = {pool[i].attribute for i in combo}
            if len(attrs) < length:
                continue
            support = int(np.logical_and.reduce([masks[i] for i in combo]).sum()) if customers else 0
            if support < config.min_support:
                continue
            rule = Rule.of(pool[i] for i in combo)
            seen.setdefault(rule.id, rule)
    return sorted(seen.values(), key=lambda r: (len(r.predicates), r.id))
