"""Promote/retire business rules from the stream of rule firings.

Every fired rule id goes into a LossyCounting sketch. Every
``refresh_cadence`` events the heavy hitters at ``phi`` are recomputed:
newly qualifying rules are promoted (inserted into the counting Bloom
filter) and promoted rules that dropped out are retired (removed from it).
The lifecycle table is authoritative; the filter is only a fast negative
check, so a filter false positive can never make a retired rule look
promoted.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Iterable

from ..counting_bloom import CbfConfig, CountingBloomFilter
from ..errors import PhiTooSmall
from ..lossy_counting import LossyCounter
from .dsl import Lifecycle, Rule


@dataclass(frozen=True)
class Transition:
    event_index: int
    rule_id: str
    before: str
    after: str

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


class RuleStreamState:
    def __init__(self, rules: Iterable[Rule] = (), epsilon: float = 0.001, phi: float = 0.01,
                 refresh_cadence: int | None = None, cbf_config: CbfConfig = CbfConfig()):
        if not epsilon < phi:
            raise PhiTooSmall(f"PhiTooSmall: phi={phi} must exceed epsilon={epsilon}")
        self.sketch = LossyCounter(epsilon)
        self.promoted_set = CountingBloomFilter(cbf_config)
        self.phi = phi
        self.refresh_cadence = refresh_cadence or self.sketch.width
        self.n_events = 0
        self.rules: dict[str, Rule] = {}
        self.lifecycle: dict[str, Lifecycle] = {}
        self.log: list[Transition] = []
        for rule in rules:
            self.rules[rule.id] = rule
            self.lifecycle[rule.id] = Lifecycle.CANDIDATE

    def is_promoted(self, rule_id: str) -> bool:
        return rule_id in self.promoted_set and self.lifecycle.get(rule_id) is Lifecycle.PROMOTED

    def promoted(self) -> list[str]:
        return sorted(r for r, state in self.lifecycle.items() if state is Lifecycle.PROMOTED)

    def _move(self, rule_id: str, after: Lifecycle) -> None:
        before = self.lifecycle.get(rule_id, Lifecycle.CANDIDATE)
        self.lifecycle[rule_id] = after
        self.log.append(Transition(self.n_events, rule_id, before.value, after.value))

    def refresh(self) -> None:
        frequent = {item for item, _, _ in self.sketch.heavy_hitters(self.phi)}
        for rule_id in sorted(frequent):
            if self.lifecycle.get(rule_id) is not Lifecycle.PROMOTED:
                self.promoted_set.insert(rule_id)
                self._move(rule_id, Lifecycle.PROMOTED)
        for rule_id in self.promoted():
            if rule_id not in frequent:
                self.promoted_set.remove(rule_id)
                self._move(rule_id, Lifecycle.RETIRED)

    def snapshot(self) -> dict:
        return {
            "phi": self.phi,
            "refresh_cadence": self.refresh_cadence,
            "n_events": self.n_events,
            "lifecycle": {k: v.value for k, v in sorted(self.lifecycle.items())},
            "linked_offers": {k: r.linked_offer for k, r in sorted(self.rules.items()) if r.linked_offer},
            "sketch": self.sketch.snapshot(),
            "cbf": self.promoted_set.snapshot(),
        }

    @classmethod
    def from_snapshot(cls, d: dict) -> "RuleStreamState":
        from .dsl import parse_rule

        sketch = LossyCounter.from_snapshot(d["sketch"])
        cbf = CountingBloomFilter.from_snapshot(d["cbf"])
        state = cls(epsilon=sketch.epsilon, phi=d["phi"], refresh_cadence=d["refresh_cadence"], cbf_config=cbf.config)
        state.sketch, state.promoted_set, state.n_events = sketch, cbf, d["n_events"]
        links = d.get("linked_offers", {})
        for rule_id, value in d["lifecycle"].items():
            state.lifecycle[rule_id] = Lifecycle(value)
            try:
                rule = parse_rule(rule_id)
            except ValueError:
                continue
            state.rules[rule_id] = Rule(rule.id, rule.predicates, Lifecycle(value), links.get(rule_id))
        return state


def process_event(state: RuleStreamState, fired_rule_ids: Iterable[str]) -> None:
    for rule_id in fired_rule_ids:
        state.sketch.observe(rule_id)
        state.lifecycle.setdefault(rule_id, Lifecycle.CANDIDATE)
    state.n_events += 1
    if state.n_events % state.refresh_cadence == 0:
        state.refresh()
