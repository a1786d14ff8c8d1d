"""Offer assignment from the promoted rule set.

Promoted rules are scanned in canonical (id) order. Every matching rule
contributes its linked offers; the customer's A/B/C status then orders the
offer kinds, and the first candidate in (kind preference, rule order) wins.
Upgrade offers are skipped for customers with a late fee inside the offer's
look-back window.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from ..customer_model import Offer, OfferKind, OfferStatus, upgrade_eligible
from .dsl import Rule, match, parse_rule
from .lifecycle import RuleStreamState

K = OfferKind
DEFAULT_KIND_PREFERENCE: dict[OfferStatus, tuple[OfferKind, ...]] = {
    OfferStatus.A: (K.FREE_TALK_TIME, K.VAS, K.DISCOUNT_PACKAGE, K.PAID_TALK_TIME, K.UPGRADE),
    OfferStatus.B: (K.DISCOUNT_PACKAGE, K.PAID_TALK_TIME, K.VAS, K.FREE_TALK_TIME, K.UPGRADE),
    OfferStatus.C: (K.UPGRADE, K.VAS, K.DISCOUNT_PACKAGE, K.PAID_TALK_TIME, K.FREE_TALK_TIME),
}


@dataclass(frozen=True)
class Assignment:
    offer: Offer
    rule_id: str


def _offers_by_rule(catalog: Sequence[Offer], state: RuleStreamState) -> dict[str, list[Offer]]:
    by_id = {o.id: o for o in catalog}
    out: dict[str, list[Offer]] = {}
    for offer in catalog:
        if offer.eligibility_rule_id:
            out.setdefault(_canonical(offer.eligibility_rule_id), []).append(offer)
    for rule_id, rule in state.rules.items():
        if rule.linked_offer in by_id and by_id[rule.linked_offer] not in out.get(rule_id, []):
            out.setdefault(rule_id, []).append(by_id[rule.linked_offer])
    return out


def _canonical(rule_text: str) -> str:
    try:
        return parse_rule(rule_text).id
    except ValueError:
        return rule_text


def choose_offer(record, state: RuleStreamState, catalog: Sequence[Offer], status: OfferStatus,
                 as_of=None, preference: Mapping[OfferStatus, Sequence[OfferKind]] | None = None) -> Assignment | None:
    if not catalog:
        raise ValueError("offer catalog is empty")
    order = tuple((preference or DEFAULT_KIND_PREFERENCE)[OfferStatus(status)])
    linked = _offers_by_rule(catalog, state)
    best = None
    for position, rule_id in enumerate(state.promoted()):
        if not state.is_promoted(rule_id) or rule_id not in linked:
            continue
        rule: Rule = state.rules.get(rule_id) or parse_rule(rule_id)
        if not match(rule, record):
            continue
        for offer in linked[rule_id]:
            if offer.kind is OfferKind.UPGRADE and not _upgrade_ok(record, offer, as_of):
                continue
            rank = (order.index(offer.kind) if offer.kind in order else len(order), position)
            if best is None or rank < best[0]:
                best = (rank, Assignment(offer, rule_id))
    return best[1] if best else None


def _upgrade_ok(record, offer: Offer, as_of) -> bool:
    lookback = int(offer.parameters.get("lookback_months", 6))
    if as_of is None:
        return not any(k.value == "LATE_FEE" for k in record.keywords)
    return upgrade_eligible(record, as_of, lookback)


def assign_offer(record, state: RuleStreamState, catalog: Sequence[Offer], status: OfferStatus,
                 as_of=None, preference=None) -> Offer | None:
    chosen = choose_offer(record, state, catalog, status, as_of, preference)
    return chosen.offer if chosen else None
