"""Shared checkers used by the unit tests and the acceptance suite."""
from __future__ import annotations

import math

import numpy as np

from offerforge.lossy_counting import LossyCounter, space_bound
from offerforge.oracles import ExactCounter, exact_heavy_hitters


def check_lossy_state(sketch: LossyCounter, exact: ExactCounter, phis=()) -> list[str]:
    """Every guarantee of the sketch against the exact counts; returns the violations."""
    problems = []
    n = exact.n
    for item, true in exact.counts.items():
        est = sketch.estimate(item)
        if est is None:
            if true > sketch.epsilon * n:
                problems.append(f"{item!r} dropped with count {true} > eps*n")
        else:
            lower, upper = est
            if not (true - sketch.epsilon * n <= lower <= true <= upper):
                problems.append(f"{item!r} estimate {est} vs true {true}")
    for phi in phis:
        reported = {item for item, _, _ in sketch.heavy_hitters(phi)}
        for item, _ in exact_heavy_hitters(exact, phi):
            if item not in reported:
                problems.append(f"false negative {item!r} at phi={phi}")
        for item in reported:
            if exact.count(item) < (phi - sketch.epsilon) * n:
                problems.append(f"{item!r} reported below (phi-eps)n at phi={phi}")
    return problems


def exhaustive_lossy(max_len: int, alphabet, epsilon: float, phis=()):
    """DFS over every stream of length <= max_len; returns (streams checked, violations)."""
    stack = [((), LossyCounter(epsilon), ExactCounter())]
    checked, problems = 0, []
    while stack:
        prefix, sketch, exact = stack.pop()
        if prefix:
            checked += 1
            found = check_lossy_state(sketch, exact, phis)
            if sketch.n % sketch.width == 0 and len(sketch) > space_bound(epsilon, sketch.n):
                found.append(f"table size {len(sketch)} over bound")
            if found:
                problems.append(("".join(prefix), found))
        if len(prefix) == max_len:
            continue
        for symbol in alphabet:
            child = sketch.copy()
            child.observe(symbol)
            counts = ExactCounter()
            counts.counts, counts.n = dict(exact.counts), exact.n
            counts.add(symbol)
            stack.append((prefix + (symbol,), child, counts))
    return checked, problems


def zipf_stream(rng: np.random.Generator, n: int, exponent: float, support: int = 10_000) -> np.ndarray:
    """Zipf draws truncated to ``support`` symbols (via inverse-CDF on the finite law)."""
    weights = 1.0 / np.arange(1, support + 1) ** exponent
    cdf = np.cumsum(weights / weights.sum())
    return np.searchsorted(cdf, rng.random(n), side="right") + 1


def binomial_sigma(n: int, p: float) -> float:
    return math.sqrt(n * p * (1 - p))


def run_lifecycle_checked(state, events, exact: ExactCounter | None = None) -> list[str]:
    """Feed ``events`` into ``state`` and compare every refresh against exact counts.

    Pass the same ``exact`` counter when continuing a stream across calls.
    """
    from offerforge.rule_engine import process_event

    exact = ExactCounter() if exact is None else exact
    eps = state.sketch.epsilon
    problems = []
    for event in events:
        for rule_id in event:
            exact.add(rule_id)
        before = len(state.log)
        process_event(state, event)
        if state.n_events % state.refresh_cadence:
            continue
        promoted = set(state.promoted())
        for item, _ in exact_heavy_hitters(exact, state.phi):
            if item not in promoted:
                problems.append(f"event {state.n_events}: {item} frequent but not promoted")
        for item in promoted:
            if exact.count(item) < (state.phi - eps) * exact.n:
                problems.append(f"event {state.n_events}: {item} promoted below (phi-eps)n")
            if item not in state.promoted_set:
                problems.append(f"event {state.n_events}: {item} promoted but missing from filter")
        for t in state.log[before:]:
            if (t.before, t.after) not in {("candidate", "promoted"), ("promoted", "retired"), ("retired", "promoted")}:
                problems.append(f"illegal transition {t}")
    return problems
