"""The batch subcommands: segment, train-tree, stream, offers, entropy.

Each command reads and validates all its inputs first and only then writes
its outputs, each through a temporary file that is renamed into place.
"""
from __future__ import annotations

import csv
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

from ..cart import accuracy, binarize_predictors, grow_tree, predict, prune
from ..customer_model import (
    EventStatus, Offer, classify_offer_status, from_day, load_customers, load_offer_events, with_history,
)
from ..errors import EmptyDataset, MalformedInput, MissingArtifact, OfferforgeError
from ..ga_segmentation import evolve
from ..keyword_extraction import extract_keywords, load_dictionary
from ..ltv_model import lifetime_values
from ..oracles import ExactCounter, exact_entropy
from ..rfm_codec import compute_boundaries
from ..rng import derive_seed
from ..rule_engine import RuleStreamState, choose_offer, load_rules, parse_rule, process_event
from ..rule_engine import estimate_entropy
from .config import RunConfig, write_atomic

SEGMENTATION_FILE = "segmentation.json"
HISTORY_FILE = "fitness_history.csv"
TREE_FILE = "tree.json"
TREE_METRICS_FILE = "tree_metrics.json"
LIFECYCLE_FILE = "lifecycle_log.jsonl"
PROMOTED_FILE = "promoted.json"
OFFERS_FILE = "offers.jsonl"
OFFER_SUMMARY_FILE = "offer_summary.json"


def _dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _required(config: RunConfig, key: str) -> Path:
    path = config.path(key)
    if path is None:
        raise OfferforgeError(f"config is missing paths.{key}")
    return path


def load_population(config: RunConfig):
    """Customers with their offer history and any keywords found in statements."""
    customers = load_customers(_required(config, "customers"))
    events_path = config.path("offer_events")
    if events_path is not None:
        customers = with_history(customers, load_offer_events(events_path))
    statements = config.path("statements")
    if statements is not None and statements.is_dir():
        dictionary = load_dictionary(config.path("dictionary"))
        merged = []
        for c in customers:
            file = statements / f"{c.id}.txt"
            if file.is_file():
                hits = extract_keywords(file.read_text(encoding="utf-8").splitlines(), dictionary)
                c = replace(
                    c,
                    keywords=c.keywords | {h.keyword for h in hits if h.date is None},
                    keyword_dates=tuple(set(c.keyword_dates) | {(h.keyword, h.date) for h in hits if h.date is not None}),
                )
            merged.append(c)
        customers = merged
    return customers


def _as_of(config: RunConfig, customers) -> int:
    """Configured reference date, else the latest dated fact in the data."""
    if config.as_of is not None:
        return config.as_of
    days = [e.date for c in customers for e in c.offer_history]
    days += [d for c in customers for _, d in c.keyword_dates]
    if not days:
        raise OfferforgeError("no as_of in config and no dated events to infer it from")
    return max(days)


def responded(record) -> bool:
    return any(e.status is EventStatus.ACCEPTED for e in record.offer_history)


# -- segment ---------------------------------------------------------------

def cmd_segment(config: RunConfig) -> dict:
    customers = load_population(config)
    if not customers:
        raise EmptyDataset("EmptyDataset: customers file has no rows")
    boundaries = compute_boundaries(customers)
    result = evolve(config.ga, customers, config.ltv, config.campaign, boundaries)
    seg = result.segmentation
    index = seg.assign(customers)
    ltv = lifetime_values(customers, config.ltv, config.campaign)
    doc = seg.to_dict()
    for entry in doc["segments"]:
        members = index == entry["index"]
        entry["customers"] = int(members.sum())
        entry["total_ltv"] = int(ltv[members].sum())
        entry["targeted"] = entry["index"] in seg.targeted
    targeted_mask = [int(i) in seg.targeted for i in index]
    doc.update({
        "seed": config.seed,
        "campaign": config.campaign.id,
        "boundaries": boundaries.as_list(),
        "chromosome": "".join(str(int(b)) for b in result.best),
        "fitness": result.best_fitness,
        "generations": len(result.history),
        "targeted_customers": sorted(c.id for c, t in zip(customers, targeted_mask) if t),
        "targeted_ltv": int(ltv[targeted_mask].sum()),
    })
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["generation", "best", "mean"])
    for g, best, mean in result.history:
        writer.writerow([g, best, f"{mean:.4f}"])
    out = config.output_dir
    write_atomic(out / SEGMENTATION_FILE, _dumps(doc))
    write_atomic(out / HISTORY_FILE, buf.getvalue())
    return doc


# -- train-tree ------------------------------------------------------------

def cmd_train_tree(config: RunConfig) -> dict:
    customers = load_population(config)
    if not customers:
        raise EmptyDataset("EmptyDataset: customers file has no rows")
    labels = [responded(c) for c in customers]
    samples = binarize_predictors(customers, compute_boundaries(customers), labels)
    tree = prune(grow_tree(samples, config.cart), config.cart.pruning_alpha)
    warning = None
    if len(set(labels)) == 1:
        warning = f"all {len(labels)} samples are {'positive' if labels[0] else 'negative'}; tree is a single leaf"
        print(f"warning: {warning}", file=sys.stderr)

    ltv = lifetime_values(customers, config.ltv, config.campaign)
    predicted = [predict(tree, s)[0] for s in samples]
    metrics = {
        "n_samples": len(samples),
        "n_positive": sum(labels),
        "training_accuracy": accuracy(tree, samples),
        "leaf_count": tree.leaf_count(),
        "leaves": [{"negative": leaf.counts[0], "positive": leaf.counts[1]} for leaf in tree.root.leaves()],
        "cart_targeted_customers": sum(predicted),
        "cart_targeted_ltv": int(sum(v for v, p in zip(ltv.tolist(), predicted) if p)),
        "ga_targeted_ltv": _ga_targeted_ltv(config),
        "warning": warning,
    }
    out = config.output_dir
    write_atomic(out / TREE_FILE, tree.to_json() + "\n")
    write_atomic(out / TREE_METRICS_FILE, _dumps(metrics))
    return metrics


def _ga_targeted_ltv(config: RunConfig):
    path = config.output_dir / SEGMENTATION_FILE
    if not path.is_file():
        return None
    return json.loads(path.read_text(encoding="utf-8")).get("targeted_ltv")


# -- stream ----------------------------------------------------------------

def _read_events(path: Path):
    """Rule-firing events, one JSON object per line with ``fired_rule_ids``."""
    canonical: dict[str, str] = {}

    def canon(text: str) -> str:
        if text not in canonical:
            canonical[text] = parse_rule(text).id
        return canonical[text]

    events = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                fired = obj["fired_rule_ids"] if isinstance(obj, dict) else obj
                if not isinstance(fired, list) or not all(isinstance(r, str) for r in fired):
                    raise ValueError("fired_rule_ids must be a list of strings")
                events.append([canon(r) for r in fired])
            except (ValueError, KeyError, TypeError) as exc:
                raise MalformedInput(f"{path}:{lineno}: malformed event: {exc}") from None
    return events


def _linked_offers(config: RunConfig) -> dict[str, str]:
    catalog = config.path("catalog")
    if catalog is None or not catalog.is_file():
        return {}
    out = {}
    for offer in _load_catalog(catalog):
        if offer.eligibility_rule_id:
            out.setdefault(parse_rule(offer.eligibility_rule_id).id, offer.id)
    return out


def cmd_stream(config: RunConfig, events_path) -> dict:
    events_path = Path(events_path)
    if not events_path.is_file():
        raise MissingArtifact(f"event file {events_path} not found")
    links = _linked_offers(config)
    rules = load_rules(config.path("rules")) if config.path("rules") else []
    rules = [replace(r, linked_offer=links.get(r.id)) for r in rules]
    events = _read_events(events_path)
    s = config.stream
    state = RuleStreamState(rules, s.epsilon, s.phi, s.refresh_cadence, config.cbf)
    for fired in events:
        process_event(state, fired)
    if state.n_events % state.refresh_cadence:
        state.refresh()
    snapshot = state.snapshot()
    snapshot["promoted"] = state.promoted()
    out = config.output_dir
    write_atomic(out / LIFECYCLE_FILE, "".join(t.to_json() + "\n" for t in state.log))
    write_atomic(out / PROMOTED_FILE, _dumps(snapshot))
    return {"events": state.n_events, "transitions": len(state.log), "promoted": state.promoted()}


# -- offers ----------------------------------------------------------------

def _load_catalog(path: Path) -> list[Offer]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return [Offer.from_dict(d) for d in data]
    except FileNotFoundError:
        raise MissingArtifact(f"offer catalog {path} not found") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise MalformedInput(f"offer catalog {path}: {exc}") from None


def cmd_offers(config: RunConfig) -> dict:
    snapshot_path = config.output_dir / PROMOTED_FILE
    if not snapshot_path.is_file():
        raise MissingArtifact(f"MissingArtifact: {snapshot_path} not found; run the stream command first")
    state = RuleStreamState.from_snapshot(json.loads(snapshot_path.read_text(encoding="utf-8")))
    catalog = _load_catalog(_required(config, "catalog"))
    customers = load_population(config)
    as_of = _as_of(config, customers) if customers else config.as_of

    lines, by_kind, by_status = [], {}, {}
    for c in customers:
        status = classify_offer_status(c.offer_history, as_of, config.offer_window_months)
        chosen = choose_offer(c, state, catalog, status, as_of)
        kind = chosen.offer.kind.value if chosen else None
        by_kind[kind or "none"] = by_kind.get(kind or "none", 0) + 1
        by_status[status.value] = by_status.get(status.value, 0) + 1
        lines.append(json.dumps({
            "customer_id": c.id,
            "status": status.value,
            "offer_id": chosen.offer.id if chosen else None,
            "offer_kind": kind,
            "parameters": dict(chosen.offer.parameters) if chosen else None,
            "matched_rule": chosen.rule_id if chosen else None,
        }, sort_keys=True))
    summary = {
        "as_of": from_day(as_of).isoformat() if as_of is not None else None,
        "n_customers": len(customers),
        "by_kind": dict(sorted(by_kind.items())),
        "by_status": dict(sorted(by_status.items())),
    }
    out = config.output_dir
    write_atomic(out / OFFERS_FILE, "".join(line + "\n" for line in lines))
    write_atomic(out / OFFER_SUMMARY_FILE, _dumps(summary))
    return summary


# -- entropy ---------------------------------------------------------------

def read_stream(path) -> list[str]:
    try:
        with open(path, encoding="utf-8") as fh:
            return [line.strip() for line in fh if line.strip()]
    except FileNotFoundError:
        raise MissingArtifact(f"stream file {path} not found") from None


def cmd_entropy(config: RunConfig, stream_path, exact: bool = False) -> dict:
    s = config.stream
    items = read_stream(stream_path)
    estimate = estimate_entropy(items, s.epsilon, s.phi, s.sample_size, derive_seed(config.seed, "entropy"))
    result = {"n": len(items), "epsilon": s.epsilon, "phi": s.phi, "estimate_bits": estimate}
    if exact:
        counter = ExactCounter()
        for x in items:
            counter.add(x)
        result["exact_bits"] = exact_entropy(counter) if items else 0.0
    return result
