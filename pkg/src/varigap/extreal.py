"""Saturating arithmetic on the nonnegative extended reals [0, +inf].

This is the value space of every integrand and energy in the package: a
value is either a finite nonnegative float or plus infinity.  NaN is
rejected at construction, so no downstream arithmetic can produce one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering


class ExtRealError(ValueError):
    """An operation would leave [0, +inf] (negative, NaN, or bad scalar)."""


@total_ordering
@dataclass(frozen=True)
class ExtendedValue:
    """A single value in [0, +inf].

    Stored as a float where ``math.inf`` marks the infinite element.
    Infinity is the top element of the order; two infinities compare equal.
    """

    raw: float

    def __post_init__(self) -> None:
        raw = float(self.raw)
        if math.isnan(raw):
            raise ExtRealError("extended value cannot be NaN")
        if raw < 0.0:
            raise ExtRealError(f"extended value must be nonnegative, got {raw}")
        object.__setattr__(self, "raw", raw)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.raw)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.raw)

    @property
    def value(self) -> float:
        """Finite payload; raises if this value is infinite."""
        if self.is_infinite:
            raise ExtRealError("infinite value carries no finite payload")
        return self.raw

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ExtendedValue):
            return self.raw == other.raw
        if isinstance(other, (int, float)):
            return self.raw == float(other)
        return NotImplemented

    def __lt__(self, other: object) -> bool:
        if isinstance(other, ExtendedValue):
            return self.raw < other.raw
        if isinstance(other, (int, float)):
            return self.raw < float(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.raw)

    def __repr__(self) -> str:
        return "ExtendedValue(inf)" if self.is_infinite else f"ExtendedValue({self.raw!r})"

    def to_json(self) -> float | str:
        """Number when finite, the string "inf" otherwise."""
        return "inf" if self.is_infinite else self.raw

    @classmethod
    def from_json(cls, obj: float | str) -> "ExtendedValue":
        if obj == "inf":
            return INF
        return cls(float(obj))


INF = ExtendedValue(math.inf)
ZERO = ExtendedValue(0.0)


def add(a: ExtendedValue, b: ExtendedValue) -> ExtendedValue:
    """Sum in [0, +inf]; infinity absorbs."""
    if a.is_infinite or b.is_infinite:
        return INF
    return ExtendedValue(a.raw + b.raw)


def scale(a: ExtendedValue, c: float) -> ExtendedValue:
    """Multiply by a finite scalar c >= 0.

    scale(inf, 0) = 0: an infinite integrand over a zero-length piece
    contributes nothing.  This is the convention that lets an energy be
    finite when the integrand is infinite only on a null set.
    """
    c = float(c)
    if math.isnan(c) or math.isinf(c):
        raise ExtRealError(f"scalar must be finite, got {c}")
    if c < 0.0:
        raise ExtRealError(f"scalar must be nonnegative, got {c}")
    if a.is_infinite:
        return ZERO if c == 0.0 else INF
    return ExtendedValue(a.raw * c)
