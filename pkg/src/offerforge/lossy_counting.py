"""LossyCounting (Manku & Motwani) frequent-items sketch.

The stream is cut into buckets of ``w = ceil(1/epsilon)`` items. An item first
seen in bucket ``b`` enters with ``f = 1, delta = b - 1``; at the end of every
bucket, entries with ``f + delta <= b`` are dropped. For every stored item
``f <= true count <= f + delta`` and ``delta <= epsilon * n``; an item that is
not stored has occurred at most ``epsilon * n`` times.

Pruning happens at exact bucket boundaries. The ``ceil(i/k)`` wording
sometimes used for this algorithm differs from the form above only by one at
bucket edges; this form is the one that carries the error guarantees.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Iterable

from .errors import PhiTooSmall


def item_bytes(item) -> bytes:
    """Stable byte encoding of an item, used for hashing and output ordering."""
    if isinstance(item, bytes):
        return item
    if isinstance(item, str):
        return item.encode("utf-8")
    if isinstance(item, (int,)) and not isinstance(item, bool):
        return str(item).encode("ascii")
    raise TypeError(f"unsupported item type {type(item).__name__}")


@dataclass(frozen=True)
class LcEntry:
    item: Hashable
    f: int
    delta: int

    @property
    def upper(self) -> int:
        return self.f + self.delta


class LossyCounter:
    def __init__(self, epsilon: float):
        if not 0.0 < epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        self.epsilon = epsilon
        self.width = math.ceil(1.0 / epsilon)
        self.n = 0
        # item -> [f, delta]
        self._table: dict = {}

    @property
    def current_bucket(self) -> int:
        return max(1, math.ceil(self.n / self.width))

    def __len__(self):
        return len(self._table)

    def __contains__(self, item):
        return item in self._table

    def observe(self, item) -> None:
        self.n += 1
        entry = self._table.get(item)
        if entry is not None:
            entry[0] += 1
        else:
            self._table[item] = [1, self.current_bucket - 1]
        if self.n % self.width == 0:
            self._prune(self.n // self.width)

    def observe_many(self, items: Iterable) -> None:
        """Feed a sequence; same result as calling ``observe`` on each item."""
        items = list(items)
        pos = 0
        while pos < len(items):
            room = self.width - self.n % self.width
            chunk = items[pos:pos + room]
            pos += len(chunk)
            bucket = self.n // self.width + 1
            table = self._table
            for item, count in Counter(chunk).items():
                entry = table.get(item)
                if entry is not None:
                    entry[0] += count
                else:
                    table[item] = [count, bucket - 1]
            self.n += len(chunk)
            if self.n % self.width == 0:
                self._prune(bucket)

    def _prune(self, bucket: int) -> None:
        self._table = {k: v for k, v in self._table.items() if v[0] + v[1] > bucket}

    def estimate(self, item) -> tuple[int, int] | None:
        entry = self._table.get(item)
        if entry is None:
            return None
        return entry[0], entry[0] + entry[1]

    def entries(self) -> list[LcEntry]:
        return [LcEntry(k, f, d) for k, (f, d) in sorted(self._table.items(), key=lambda kv: item_bytes(kv[0]))]

    def heavy_hitters(self, phi: float) -> list[tuple[Hashable, int, int]]:
        """Items with ``f + delta >= phi * n``, by ``f`` descending then item.

        Every item with true count >= phi*n is reported; none with true count
        below (phi - epsilon)*n is.
        """
        if not self.epsilon < phi:
            raise PhiTooSmall(f"PhiTooSmall: phi={phi} must exceed epsilon={self.epsilon}")
        threshold = phi * self.n
        hits = [(k, f, f + d) for k, (f, d) in self._table.items() if f + d >= threshold and self.n > 0]
        hits.sort(key=lambda h: (-h[1], item_bytes(h[0])))
        return hits

    def copy(self) -> "LossyCounter":
        out = LossyCounter.__new__(LossyCounter)
        out.epsilon, out.width, out.n = self.epsilon, self.width, self.n
        out._table = {k: list(v) for k, v in self._table.items()}
        return out

    def snapshot(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "n": self.n,
            "entries": [{"item": _json_item(e.item), "f": e.f, "delta": e.delta} for e in self.entries()],
        }

    def to_json(self) -> str:
        return json.dumps(self.snapshot(), sort_keys=True)

    @classmethod
    def from_snapshot(cls, d: dict) -> "LossyCounter":
        out = cls(d["epsilon"])
        out.n = d["n"]
        out._table = {_from_json_item(e["item"]): [e["f"], e["delta"]] for e in d["entries"]}
        return out

    @classmethod
    def from_json(cls, text: str) -> "LossyCounter":
        return cls.from_snapshot(json.loads(text))


def _json_item(item):
    if isinstance(item, bytes):
        return {"bytes": item.hex()}
    return item


def _from_json_item(value):
    if isinstance(value, dict):
        return bytes.fromhex(value["bytes"])
    return value


def space_bound(epsilon: float, n: int) -> float:
    """Entry-count ceiling ``(1/eps) ln(eps n) + 1/eps`` checked after prunes."""
    if epsilon * n <= 1:
        return 1.0 / epsilon
    return math.log(epsilon * n) / epsilon + 1.0 / epsilon
