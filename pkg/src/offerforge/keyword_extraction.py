"""Billing-statement keyword extraction.

Patterns are case-insensitive literals with at most one ``{N}`` wildcard
that captures an integer, e.g. ``{N} nat sms free``. Each statement line
yields at most one hit: the pattern whose match covers the most characters.
"""
from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable

from .errors import DuplicatePattern, OfferforgeError, UnknownKeyword

WILDCARD = "{N}"
_DATE_PREFIX = re.compile(r"^\s*(\d{4}-\d{2}-\d{2})\s+")
_DASHES = re.compile(r"\s*[-‐-―]\s*")
_SPACE = re.compile(r"\s+")


class KeywordId(str, Enum):
    VOICE_LOCAL_ONNET = "VOICE_LOCAL_ONNET"
    VOICE_LOCAL_OFFNET = "VOICE_LOCAL_OFFNET"
    VOICE_LOCAL_FIXED = "VOICE_LOCAL_FIXED"
    VOICE_STD_ONNET = "VOICE_STD_ONNET"
    VOICE_STD_OFFNET = "VOICE_STD_OFFNET"
    VOICE_STD_FIXED = "VOICE_STD_FIXED"
    VOICE_ISD = "VOICE_ISD"
    LATE_FEE = "LATE_FEE"
    SMS_LOCAL_OFFNET = "SMS_LOCAL_OFFNET"
    SMS_NATIONAL_ONNET = "SMS_NATIONAL_ONNET"
    CUG = "CUG"
    DISCOUNT_NAT_SMS = "DISCOUNT_NAT_SMS"


@dataclass(frozen=True)
class KeywordHit:
    keyword: KeywordId
    numeric_arg: int | None
    line_no: int
    date: int | None = None


def normalize(text: str) -> str:
    text = _DASHES.sub(" - ", text.lower())
    return _SPACE.sub(" ", text).strip()


def _compile(pattern: str) -> re.Pattern:
    norm = normalize(pattern)
    if norm.count(WILDCARD.lower()) > 1:
        raise OfferforgeError(f"pattern {pattern!r} has more than one wildcard")
    body = r"(\d+)".join(re.escape(part) for part in norm.split(WILDCARD.lower()))
    return re.compile(r"(?<!\w)" + body + r"(?!\w)")


class KeywordDictionary:
    def __init__(self, entries: Iterable[tuple[str, KeywordId]] = ()):
        self.entries: dict[str, KeywordId] = {}
        self._compiled: list[tuple[re.Pattern, KeywordId, bool]] = []
        for pattern, keyword in entries:
            self.add(pattern, keyword)

    def add(self, pattern: str, keyword) -> None:
        key = normalize(pattern)
        if key in self.entries:
            raise DuplicatePattern(f"duplicate pattern {pattern!r}")
        try:
            keyword = KeywordId(keyword)
        except ValueError:
            raise UnknownKeyword(f"unknown keyword id {keyword!r}") from None
        self.entries[key] = keyword
        self._compiled.append((_compile(key), keyword, WILDCARD.lower() in key))

    def keyword_ids(self) -> set[KeywordId]:
        return set(self.entries.values())

    def __len__(self):
        return len(self.entries)

    def match_line(self, line: str):
        """Best (keyword, numeric_arg) for one normalized line, or None."""
        best = None
        best_len = -1
        for regex, keyword, has_wildcard in self._compiled:
            m = regex.search(line)
            if m is not None and m.end() - m.start() > best_len:
                best_len = m.end() - m.start()
                best = (keyword, int(m.group(1)) if has_wildcard else None)
        return best


def extract_keywords(statement_lines: Iterable[str], dictionary: KeywordDictionary) -> list[KeywordHit]:
    from .customer_model import to_day

    hits = []
    for line_no, raw in enumerate(statement_lines, start=1):
        date = None
        m = _DATE_PREFIX.match(raw)
        if m:
            date = to_day(m.group(1))
            raw = raw[m.end():]
        found = dictionary.match_line(normalize(raw))
        if found is not None:
            hits.append(KeywordHit(found[0], found[1], line_no, date))
    return hits


def load_dictionary(path=None) -> KeywordDictionary:
    """Read a ``pattern,keyword_id`` CSV; without a path, the bundled default."""
    if path is None:
        text = resources.files("offerforge").joinpath("data/keywords.csv").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    rows = [r for r in csv.reader(text.splitlines()) if r and not r[0].startswith("#")]
    if rows and [c.strip().lower() for c in rows[0]] == ["pattern", "keyword_id"]:
        rows = rows[1:]
    entries = []
    for row in rows:
        if len(row) != 2:
            raise OfferforgeError(f"dictionary row {row!r} must have two columns")
        entries.append((row[0].strip(), row[1].strip()))
    return KeywordDictionary(entries)
