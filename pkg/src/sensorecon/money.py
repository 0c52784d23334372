"""Exact integer-cent money arithmetic.

Every balance, transfer, and reported dollar figure in the package is a
whole number of cents; rounding happens once, at a documented boundary,
never silently inside arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def round_half_away(x: float) -> int:
    """Round to the nearest integer, halves away from zero.

    Python's built-in round() is banker's rounding, which is the wrong
    convention for money.
    """
    if x >= 0:
        return math.floor(x + 0.5)
    return -math.floor(-x + 0.5)


@dataclass(frozen=True, order=True)
class Money:
    """An exact amount in USD cents. Negative values are allowed (losses)."""

    cents: int

    def __post_init__(self):
        if not isinstance(self.cents, int) or isinstance(self.cents, bool):
            raise TypeError(f"Money requires an int cent amount, got {self.cents!r}")

    @classmethod
    def from_dollars(cls, dollars: float | int | str) -> "Money":
        return cls(round_half_away(float(dollars) * 100.0))

    @property
    def dollars(self) -> float:
        return self.cents / 100.0

    def __add__(self, other: "Money") -> "Money":
        return Money(self.cents + other.cents)

    def __sub__(self, other: "Money") -> "Money":
        return Money(self.cents - other.cents)

    def __neg__(self) -> "Money":
        return Money(-self.cents)

    def __mul__(self, factor: int) -> "Money":
        if not isinstance(factor, int):
            raise TypeError("Money only multiplies by an integer; use scale() for rates")
        return Money(self.cents * factor)

    __rmul__ = __mul__

    def __abs__(self) -> "Money":
        return Money(abs(self.cents))

    def __bool__(self) -> bool:
        return self.cents != 0

    def scale_floor(self, rate: float) -> "Money":
        """cents * rate, rounded down. Used where remainders are tracked separately."""
        return Money(math.floor(self.cents * rate))

    def scale_round(self, rate: float) -> "Money":
        """cents * rate, rounded half away from zero."""
        return Money(round_half_away(self.cents * rate))

    def __str__(self) -> str:
        sign = "-" if self.cents < 0 else ""
        c = abs(self.cents)
        return f"{sign}${c // 100}.{c % 100:02d}"


ZERO = Money(0)


def dollars_str(m: Money) -> str:
    return str(m)


def whole_dollars(m: Money) -> int:
    """Round to whole dollars, halves away from zero (report-table convention)."""
    return round_half_away(m.cents / 100.0)
