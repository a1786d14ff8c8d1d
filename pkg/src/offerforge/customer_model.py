"""Customer, offer and offer-event value types, plus their CSV formats.

Dates are plain ``int`` days since 1970-01-01. Currency fields
(``monetary``, ``margin_amount``) hold integer minor units (cents) so that
sums are exact; the CSV files carry major units (``35.50``).
"""
from __future__ import annotations

import csv
import datetime as _dt
import io
from dataclasses import dataclass, field, replace
from decimal import Decimal, InvalidOperation
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import EmptyDataset, OfferforgeError
from .keyword_extraction import KeywordId

EPOCH = _dt.date(1970, 1, 1)
MINOR_PER_MAJOR = 100


class Gender(str, Enum):
    MALE = "male"
    FEMALE = "female"


class EventStatus(str, Enum):
    QUALIFIED = "qualified"
    REJECTED = "rejected"
    ACCEPTED = "accepted"


class OfferStatus(str, Enum):
    """A: never qualified in the window; B: qualified, nothing accepted; C: accepted."""

    A = "A"
    B = "B"
    C = "C"


class OfferKind(str, Enum):
    FREE_TALK_TIME = "free_talk_time"
    PAID_TALK_TIME = "paid_talk_time"
    VAS = "vas"
    DISCOUNT_PACKAGE = "discount_package"
    UPGRADE = "upgrade"


# kind -> parameters that must be present
REQUIRED_OFFER_PARAMETERS: dict[OfferKind, tuple[str, ...]] = {
    OfferKind.FREE_TALK_TIME: ("minutes",),
    OfferKind.PAID_TALK_TIME: ("minutes", "upfront_fee"),
    OfferKind.VAS: (),
    OfferKind.DISCOUNT_PACKAGE: ("free_sms",),
    OfferKind.UPGRADE: ("max_late_fees", "lookback_months"),
}


def to_day(value) -> int:
    """Days since epoch from an int, a ``date`` or an ISO ``YYYY-MM-DD`` string."""
    if isinstance(value, bool):
        raise TypeError("bool is not a date")
    if isinstance(value, int):
        return value
    if isinstance(value, _dt.date):
        return (value - EPOCH).days
    text = str(value).strip()
    if text.lstrip("-").isdigit():
        return int(text)
    return (_dt.date.fromisoformat(text) - EPOCH).days


def from_day(day: int) -> _dt.date:
    return EPOCH + _dt.timedelta(days=day)


def months_before(day: int, months: int) -> int:
    """Same calendar day ``months`` earlier, clamped to the end of a short month."""
    d = from_day(day)
    total = d.year * 12 + (d.month - 1) - months
    year, month = divmod(total, 12)
    month += 1
    if month == 12:
        last = 31
    else:
        last = (_dt.date(year, month + 1, 1) - _dt.timedelta(days=1)).day
    return to_day(_dt.date(year, month, min(d.day, last)))


def in_window(day: int, as_of: int, window_months: int) -> bool:
    """Half-open window ``(as_of - window_months, as_of]``."""
    return months_before(as_of, window_months) < day <= as_of


@dataclass(frozen=True)
class OfferEvent:
    offer_id: str
    date: int
    status: EventStatus

    def __post_init__(self):
        object.__setattr__(self, "status", EventStatus(self.status))
        object.__setattr__(self, "date", to_day(self.date))


@dataclass(frozen=True)
class Offer:
    id: str
    kind: OfferKind
    parameters: Mapping[str, float] = field(default_factory=dict)
    eligibility_rule_id: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", OfferKind(self.kind))
        missing = [p for p in REQUIRED_OFFER_PARAMETERS[self.kind] if p not in self.parameters]
        if missing:
            raise OfferforgeError(f"offer {self.id!r} ({self.kind.value}) missing parameters {missing}")
        if self.kind is OfferKind.UPGRADE and self.parameters["max_late_fees"] != 0:
            raise OfferforgeError(f"upgrade offer {self.id!r} must have max_late_fees=0")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "parameters": dict(self.parameters),
            "eligibility_rule_id": self.eligibility_rule_id,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Offer":
        return cls(d["id"], d["kind"], dict(d.get("parameters", {})), d.get("eligibility_rule_id"))


@dataclass(frozen=True)
class CustomerRecord:
    id: str
    age: int
    gender: Gender
    recency: int
    frequency: int
    monetary: int  # minor units
    margin_amount: int  # minor units per month
    churn_probability: float
    days_since_last_upgrade: int
    days_of_zero_usage: int
    outgoing_call_minutes: float
    night_sms_count: int
    internet_mb: float
    keywords: frozenset = frozenset()
    # dated keyword occurrences: ((KeywordId, day), ...)
    keyword_dates: tuple = ()
    offer_history: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "gender", Gender(self.gender))
        kws = frozenset(KeywordId(k) for k in self.keywords)
        dated = tuple(sorted((KeywordId(k), to_day(d)) for k, d in self.keyword_dates))
        object.__setattr__(self, "keyword_dates", dated)
        object.__setattr__(self, "keywords", kws | {k for k, _ in dated})
        object.__setattr__(self, "offer_history", tuple(self.offer_history))
        if not 0.0 <= self.churn_probability <= 1.0:
            raise OfferforgeError(f"customer {self.id}: churn_probability outside [0, 1]")
        for name in NON_NEGATIVE_FIELDS:
            if getattr(self, name) < 0:
                raise OfferforgeError(f"customer {self.id}: {name} is negative")


NON_NEGATIVE_FIELDS = (
    "age", "recency", "frequency", "monetary", "days_since_last_upgrade",
    "days_of_zero_usage", "outgoing_call_minutes", "night_sms_count", "internet_mb",
)
CURRENCY_FIELDS = ("monetary", "margin_amount")
INTEGER_FIELDS = (
    "age", "recency", "frequency", "days_since_last_upgrade",
    "days_of_zero_usage", "night_sms_count",
)
FLOAT_FIELDS = ("churn_probability", "outgoing_call_minutes", "internet_mb")
# numeric attributes usable in rules and tree predictors
NUMERIC_FIELDS = (
    "age", "recency", "frequency", "monetary", "margin_amount", "churn_probability",
    "days_since_last_upgrade", "days_of_zero_usage", "outgoing_call_minutes",
    "night_sms_count", "internet_mb",
)
CSV_COLUMNS = ("id", "gender") + NUMERIC_FIELDS + ("keywords",)
OFFER_EVENT_COLUMNS = ("id", "offer_id", "date", "status")


def classify_offer_status(history: Iterable[OfferEvent], as_of, window_months: int = 6) -> OfferStatus:
    if window_months < 1:
        raise ValueError("window_months must be >= 1")
    as_of = to_day(as_of)
    seen = set()
    for event in history:
        if in_window(event.date, as_of, window_months):
            seen.add(event.status)
    if EventStatus.ACCEPTED in seen:
        return OfferStatus.C
    if seen:
        return OfferStatus.B
    return OfferStatus.A


def upgrade_eligible(record: CustomerRecord, as_of, lookback_months: int = 6) -> bool:
    """No LATE_FEE occurrence in the ``lookback_months`` before ``as_of``.

    A LATE_FEE keyword without any date cannot be placed outside the window,
    so it counts against eligibility.
    """
    as_of = to_day(as_of)
    dated = [d for k, d in record.keyword_dates if k is KeywordId.LATE_FEE]
    if KeywordId.LATE_FEE in record.keywords and not dated:
        return False
    return not any(in_window(d, as_of, lookback_months) for d in dated)


def with_history(records: Sequence[CustomerRecord], events: Mapping[str, Sequence[OfferEvent]]):
    return [replace(r, offer_history=tuple(events.get(r.id, ()))) for r in records]


# --- CSV ---------------------------------------------------------------------

def parse_money(text: str) -> int:
    try:
        value = Decimal(str(text).strip().lstrip("$"))
    except InvalidOperation:
        raise OfferforgeError(f"bad currency amount {text!r}") from None
    return int((value * MINOR_PER_MAJOR).to_integral_value())


def format_money(minor: int) -> str:
    sign = "-" if minor < 0 else ""
    whole, cents = divmod(abs(minor), MINOR_PER_MAJOR)
    return f"{sign}{whole}.{cents:02d}"


def _parse_keywords(text: str):
    plain, dated = set(), []
    for token in filter(None, (t.strip() for t in text.split(";"))):
        name, _, date = token.partition("@")
        try:
            kw = KeywordId(name)
        except ValueError:
            raise OfferforgeError(f"unknown keyword {name!r}") from None
        if date:
            dated.append((kw, to_day(date)))
        else:
            plain.add(kw)
    return plain, dated


def _format_keywords(record: CustomerRecord) -> str:
    dated_ids = {k for k, _ in record.keyword_dates}
    tokens = [f"{k.value}@{from_day(d).isoformat()}" for k, d in record.keyword_dates]
    tokens += sorted(k.value for k in record.keywords if k not in dated_ids)
    return ";".join(tokens)


def record_from_row(row: Mapping[str, str]) -> CustomerRecord:
    missing = [c for c in CSV_COLUMNS if c not in row]
    if missing:
        raise OfferforgeError(f"customers CSV missing columns {missing}")
    values = {"id": row["id"], "gender": row["gender"].strip().lower()}
    try:
        for name in INTEGER_FIELDS:
            values[name] = int(row[name])
        for name in FLOAT_FIELDS:
            values[name] = float(row[name])
    except ValueError as exc:
        raise OfferforgeError(f"customer {row['id']!r}: {exc}") from None
    for name in CURRENCY_FIELDS:
        values[name] = parse_money(row[name])
    plain, dated = _parse_keywords(row.get("keywords") or "")
    return CustomerRecord(keywords=frozenset(plain), keyword_dates=tuple(dated), **values)


def record_to_row(record: CustomerRecord) -> dict:
    row = {"id": record.id, "gender": record.gender.value}
    for name in NUMERIC_FIELDS:
        value = getattr(record, name)
        row[name] = format_money(value) if name in CURRENCY_FIELDS else repr(value) if isinstance(value, float) else str(value)
    row["keywords"] = _format_keywords(record)
    return row


def load_customers(path) -> list[CustomerRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise EmptyDataset("EmptyDataset: customers CSV has no header")
        records = [record_from_row(row) for row in reader]
    ids = [r.id for r in records]
    if len(set(ids)) != len(ids):
        raise OfferforgeError("duplicate customer id in customers CSV")
    return records


def customers_csv(records: Iterable[CustomerRecord]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow(record_to_row(r))
    return buf.getvalue()


def load_offer_events(path) -> dict[str, list[OfferEvent]]:
    out: dict[str, list[OfferEvent]] = {}
    if not Path(path).exists():
        return out
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.DictReader(fh), start=2):
            try:
                event = OfferEvent(row["offer_id"], row["date"], row["status"])
            except (KeyError, ValueError) as exc:
                raise OfferforgeError(f"offer_events line {lineno}: {exc}") from None
            out.setdefault(row["id"], []).append(event)
    return out


def offer_events_csv(events: Mapping[str, Sequence[OfferEvent]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(OFFER_EVENT_COLUMNS)
    for cid in sorted(events):
        for e in events[cid]:
            writer.writerow([cid, e.offer_id, from_day(e.date).isoformat(), e.status.value])
    return buf.getvalue()
