"""Business-rule predicate language.

    rule   := clause ("AND" clause)*
    clause := IDENT OP VALUE
    OP     := "<" | "<=" | ">" | ">=" | "="      (also "≤", "≥")
    VALUE  := number | quoted token

Identifiers are CustomerRecord field names, ``AND`` is case-insensitive and
a leading currency symbol on a number is dropped. Currency attributes are
written in major units (``margin_amount > 30`` means more than 30.00).
The canonical form sorts clauses by attribute, then operator, then value,
and joins them with `` AND ``; that string is the rule id.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum

from ..customer_model import CURRENCY_FIELDS, MINOR_PER_MAJOR, NUMERIC_FIELDS
from ..errors import RuleSyntaxError, UnknownAttribute

OPERATORS = ("<", "<=", ">", ">=", "=")
_OP_ALIASES = {"≤": "<=", "≥": ">=", "==": "="}
ENUM_ATTRIBUTES = {"gender": ("female", "male")}
ATTRIBUTES = frozenset(NUMERIC_FIELDS) | frozenset(ENUM_ATTRIBUTES)

_TOKEN = re.compile(
    r"""(?P<ws>\s+)
      | (?P<op><=|>=|==|[<>=≤≥])
      | (?P<number>[$₹€£]?-?\d+(?:\.\d+)?)
      | (?P<string>"[^"]*"|'[^']*')
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


class Lifecycle(str, Enum):
    CANDIDATE = "candidate"
    PROMOTED = "promoted"
    RETIRED = "retired"


@dataclass(frozen=True)
class Predicate:
    attribute: str
    op: str
    value: Decimal | str

    def sort_key(self):
        if isinstance(self.value, Decimal):
            return (self.attribute, OPERATORS.index(self.op), 0, self.value, "")
        return (self.attribute, OPERATORS.index(self.op), 1, Decimal(0), self.value)

    def __str__(self):
        if isinstance(self.value, Decimal):
            value = format_number(self.value)
        else:
            value = f'"{self.value}"'
        return f"{self.attribute} {self.op} {value}"


@dataclass(frozen=True)
class Rule:
    id: str
    predicates: tuple[Predicate, ...]
    lifecycle: Lifecycle = field(default=Lifecycle.CANDIDATE, compare=False)
    linked_offer: str | None = field(default=None, compare=False)

    @classmethod
    def of(cls, predicates, **kwargs) -> "Rule":
        preds = tuple(sorted(predicates, key=Predicate.sort_key))
        if not preds:
            raise ValueError("a rule needs at least one predicate")
        return cls(" AND ".join(map(str, preds)), preds, **kwargs)


def format_number(value: Decimal) -> str:
    text = format(value.normalize(), "f")
    return "0" if text in ("-0", "0") else text


def _tokens(text: str):
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise RuleSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            yield m.lastgroup, m.group(), m.start()
        pos = m.end()


def _make_predicate(attr: str, attr_pos: int, op: str, kind: str, raw: str, value_pos: int) -> Predicate:
    if attr not in ATTRIBUTES:
        raise UnknownAttribute(f"unknown attribute {attr!r} at position {attr_pos}")
    if attr in ENUM_ATTRIBUTES:
        token = raw[1:-1].strip().lower() if kind == "string" else None
        if token not in ENUM_ATTRIBUTES[attr] or op != "=":
            raise RuleSyntaxError(f"{attr} takes = with one of {ENUM_ATTRIBUTES[attr]}", value_pos)
        return Predicate(attr, op, token)
    if kind != "number":
        raise RuleSyntaxError(f"{attr} needs a numeric value", value_pos)
    return Predicate(attr, op, Decimal(raw.lstrip("$₹€£")))


def parse_rule(text: str) -> Rule:
    tokens = list(_tokens(text))
    if not tokens:
        raise RuleSyntaxError("empty rule", 0)
    predicates = []
    i = 0
    end = len(text)

    def expect(kinds, what):
        nonlocal i
        if i >= len(tokens):
            raise RuleSyntaxError(f"expected {what}", end)
        kind, raw, pos = tokens[i]
        if kind not in kinds:
            raise RuleSyntaxError(f"expected {what}, found {raw!r}", pos)
        i += 1
        return kind, raw, pos

    while True:
        _, attr, attr_pos = expect(("ident",), "attribute name")
        _, op, _ = expect(("op",), "comparison operator")
        kind, raw, value_pos = expect(("number", "string"), "value")
        predicates.append(_make_predicate(attr, attr_pos, _OP_ALIASES.get(op, op), kind, raw, value_pos))
        if i == len(tokens):
            break
        kind, raw, pos = tokens[i]
        if kind != "ident" or raw.lower() != "and":
            raise RuleSyntaxError(f"expected AND, found {raw!r}", pos)
        i += 1
        if i == len(tokens):
            raise RuleSyntaxError("dangling AND", end)
    return Rule.of(predicates)


def format_rule(rule: Rule) -> str:
    return " AND ".join(map(str, sorted(rule.predicates, key=Predicate.sort_key)))


def _record_value(record, attribute: str):
    value = getattr(record, attribute)
    if attribute in CURRENCY_FIELDS:
        return Decimal(value) / MINOR_PER_MAJOR
    if isinstance(value, float):
        return Decimal(repr(value))
    if isinstance(value, Enum):
        return value.value
    return Decimal(value)


def holds(predicate: Predicate, record) -> bool:
    actual = _record_value(record, predicate.attribute)
    target = predicate.value
    op = predicate.op
    if op == "=":
        return actual == target
    if op == "<":
        return actual < target
    if op == "<=":
        return actual <= target
    if op == ">":
        return actual > target
    return actual >= target


def match(rule: Rule, record) -> bool:
    return all(holds(p, record) for p in rule.predicates)


def load_rules(path) -> list[Rule]:
    """One rule per line; blank lines and ``#`` comments are skipped."""
    rules = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                rules.append(parse_rule(text))
            except RuleSyntaxError as exc:
                raise RuleSyntaxError(f"{path}:{lineno}: {exc}", exc.position) from None
    return rules
