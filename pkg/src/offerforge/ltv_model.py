"""Lifetime value scoring used as the segmentation fitness.

    LTV = sum_{t=0}^{T-1} m * u * r**t / (1 + d)**t

with monthly margin ``m``, campaign uplift ``u``, effective retention
``r = base_retention * (1 - churn_probability)`` and discount rate ``d``.
Values are returned in integer minor units (rounded half-to-even per
customer), so segment totals are exact and independent of summation order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

import numpy as np

from .errors import UnknownSegment


class Objective(str, Enum):
    RETENTION = "retention"
    REVENUE_MAXIMIZATION = "revenue_maximization"
    UPGRADE = "upgrade"


@dataclass(frozen=True)
class CampaignStrategy:
    id: str
    objective: Objective
    parameters: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "objective", Objective(self.objective))

    @classmethod
    def from_dict(cls, d: Mapping) -> "CampaignStrategy":
        return cls(d["id"], d["objective"], dict(d.get("parameters", {})))


@dataclass(frozen=True)
class LtvParams:
    horizon_periods: int = 12
    discount_rate: float = 0.01
    base_retention: float = 0.9
    campaign_uplift: Mapping[str, float] = field(default_factory=dict)
    segment_cost: int = 0  # minor units per targeted segment

    def __post_init__(self):
        if self.horizon_periods < 1:
            raise ValueError("horizon_periods must be >= 1")
        if self.discount_rate < 0:
            raise ValueError("discount_rate must be >= 0")
        if not 0.0 <= self.base_retention <= 1.0:
            raise ValueError("base_retention must lie in [0, 1]")
        if any(u < 0 for u in self.campaign_uplift.values()):
            raise ValueError("campaign uplift factors must be >= 0")

    @classmethod
    def from_dict(cls, d: Mapping) -> "LtvParams":
        return cls(
            horizon_periods=int(d.get("horizon_periods", 12)),
            discount_rate=float(d.get("discount_rate", 0.01)),
            base_retention=float(d.get("base_retention", 0.9)),
            campaign_uplift={k: float(v) for k, v in d.get("campaign_uplift", {}).items()},
            segment_cost=int(d.get("segment_cost", 0)),
        )


def _value_factor(churn_probability: float, params: LtvParams, uplift: float) -> float:
    r = params.base_retention * (1.0 - churn_probability)
    step = r / (1.0 + params.discount_rate)
    return uplift * sum(step ** t for t in range(params.horizon_periods))


def lifetime_value(record, params: LtvParams, campaign: CampaignStrategy | None = None) -> int:
    uplift = params.campaign_uplift.get(campaign.id, 1.0) if campaign is not None else 1.0
    return int(round(record.margin_amount * _value_factor(record.churn_probability, params, uplift)))


def lifetime_values(customers, params: LtvParams, campaign: CampaignStrategy | None = None) -> np.ndarray:
    return np.array([lifetime_value(c, params, campaign) for c in customers], dtype=np.int64)


def segment_fitness(
    assignment: Mapping[str, object],
    targeted: Iterable,
    customers,
    params: LtvParams,
    campaign: CampaignStrategy | None = None,
    segments: Iterable | None = None,
) -> int:
    """Total LTV of customers in targeted segments minus a fixed cost per targeted segment.

    ``segments`` is the universe of valid segment ids; it defaults to the ids
    present in ``assignment``.
    """
    universe = set(assignment.values()) if segments is None else set(segments)
    targeted = set(targeted)
    unknown = targeted - universe
    if unknown:
        raise UnknownSegment(f"unknown segment ids {sorted(map(str, unknown))}")
    total = 0
    for c in customers:
        if assignment[c.id] in targeted:
            total += lifetime_value(c, params, campaign)
    return total - params.segment_cost * len(targeted)
