"""Quintile bucketing of recency/frequency/monetary and the 12-bit RFM code.

Breakpoints are the 20/40/60/80th percentiles with linear interpolation
(the value at rank ``1 + (n - 1) q``). Bucket ``i`` covers
``(bp[i-2], bp[i-1]]``, so a value equal to a breakpoint falls in the lower
bucket. Each bucket index 1..5 is written as a 4-bit big-endian group and the
groups are concatenated R|F|M: ``(1, 2, 5) -> "000100100101"``.
"""
from __future__ import annotations

import json
from bisect import bisect_left
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyDataset, InvalidCode

QUANTILES = (0.2, 0.4, 0.6, 0.8)
BITS_PER_BUCKET = 4
N_BUCKETS = 5
RFM_FIELDS = ("recency", "frequency", "monetary")


def percentile_breakpoints(values: Sequence[float]) -> tuple[float, ...]:
    if len(values) == 0:
        raise EmptyDataset("EmptyDataset: no values to compute breakpoints from")
    cuts = np.percentile(np.asarray(values, dtype=np.float64), [q * 100 for q in QUANTILES], method="linear")
    return tuple(float(c) for c in cuts)


@dataclass(frozen=True)
class QuantileBoundaries:
    r: tuple[float, ...]
    f: tuple[float, ...]
    m: tuple[float, ...]

    def __post_init__(self):
        for name in ("r", "f", "m"):
            bps = tuple(float(x) for x in getattr(self, name))
            if len(bps) != 4 or any(a > b for a, b in zip(bps, bps[1:])):
                raise ValueError(f"{name} breakpoints must be 4 ascending values, got {bps}")
            object.__setattr__(self, name, bps)

    def for_field(self, name: str) -> tuple[float, ...]:
        return {"recency": self.r, "frequency": self.f, "monetary": self.m}[name]

    def as_list(self) -> list[tuple[float, ...]]:
        return [self.r, self.f, self.m]

    def to_json(self) -> str:
        return json.dumps({"r": list(self.r), "f": list(self.f), "m": list(self.m)})

    @classmethod
    def from_json(cls, text: str) -> "QuantileBoundaries":
        d = json.loads(text)
        return cls(d["r"], d["f"], d["m"])


@dataclass(frozen=True)
class RfmCode:
    r_bucket: int
    f_bucket: int
    m_bucket: int

    def __post_init__(self):
        for b in (self.r_bucket, self.f_bucket, self.m_bucket):
            if not 1 <= b <= N_BUCKETS:
                raise InvalidCode(f"bucket {b} outside 1..{N_BUCKETS}")

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.r_bucket, self.f_bucket, self.m_bucket)


def compute_boundaries(customers) -> QuantileBoundaries:
    customers = list(customers)
    if not customers:
        raise EmptyDataset("EmptyDataset: no customers")
    return QuantileBoundaries(
        *(percentile_breakpoints([getattr(c, f) for c in customers]) for f in RFM_FIELDS)
    )


def bucketize(value: float, breakpoints: Sequence[float]) -> int:
    return bisect_left(breakpoints, value) + 1


def bucketize_array(values, breakpoints: Sequence[float]) -> np.ndarray:
    return np.searchsorted(np.asarray(breakpoints, dtype=np.float64), np.asarray(values, dtype=np.float64), side="left") + 1


def encode_customer(customer, boundaries: QuantileBoundaries) -> RfmCode:
    return RfmCode(*(bucketize(getattr(customer, f), boundaries.for_field(f)) for f in RFM_FIELDS))


def to_binary(code: RfmCode) -> str:
    return "".join(format(b, f"0{BITS_PER_BUCKET}b") for b in code.as_tuple())


def from_binary(bits: str) -> RfmCode:
    if len(bits) != 3 * BITS_PER_BUCKET or set(bits) - {"0", "1"}:
        raise InvalidCode(f"expected 12 binary digits, got {bits!r}")
    groups = [int(bits[i:i + BITS_PER_BUCKET], 2) for i in range(0, len(bits), BITS_PER_BUCKET)]
    return RfmCode(*groups)


def all_codes() -> Iterable[RfmCode]:
    for r in range(1, N_BUCKETS + 1):
        for f in range(1, N_BUCKETS + 1):
            for m in range(1, N_BUCKETS + 1):
                yield RfmCode(r, f, m)
