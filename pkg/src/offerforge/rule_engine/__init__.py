"""Business rules: the predicate language, candidate generation, the
promote/retire lifecycle, offer assignment and stream entropy."""
from .candidates import CandidateConfig, generate_candidate_rules, predicate_pool
from .dsl import Lifecycle, Predicate, Rule, format_rule, load_rules, match, parse_rule
from .entropy import estimate_entropy
from .lifecycle import RuleStreamState, Transition, process_event
from .offers import DEFAULT_KIND_PREFERENCE, Assignment, assign_offer, choose_offer

__all__ = [
    "Assignment", "CandidateConfig", "DEFAULT_KIND_PREFERENCE", "Lifecycle", "Predicate", "Rule",
    "RuleStreamState", "Transition", "assign_offer", "choose_offer", "estimate_entropy", "format_rule",
    "generate_candidate_rules", "load_rules", "match", "parse_rule", "predicate_pool", "process_event",
]
