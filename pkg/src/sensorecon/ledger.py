"""Cap tables, conservation-checked transactions, dividends, depreciation.

All operations are pure: they take values and return new values, so they
are safe to call from any thread. Money never leaks fractional cents;
every split is floor-per-recipient with the remainder routed to a named
destination (the reserve fund for dividends, the shareholders themselves
for liquidation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ValidationError
from .money import Money, ZERO

#: Straight-line hardware depreciation, as a fraction of purchase price per month.
DEPRECIATION_RATE = 0.10


@dataclass(frozen=True)
class CapTable:
    """Share register: holder id -> share count.

    Zero-share entries are retained (a holder who sold out stays listed at 0);
    total_shares is always the sum of the entries.
    """

    entries: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for holder, shares in self.entries.items():
            if shares < 0:
                raise ValidationError(f"cap_table.{holder}: share count must be >= 0, got {shares}")

    @property
    def total_shares(self) -> int:
        return sum(self.entries.values())

    def shares_of(self, holder: str) -> int:
        return self.entries.get(holder, 0)

    def fraction_of(self, holder: str) -> float:
        total = self.total_shares
        return self.shares_of(holder) / total if total else 0.0


def issue_equity(cap_table: CapTable, holder: str, shares: int) -> CapTable:
    """Issue new shares to a holder, growing the total."""
    if shares <= 0:
        raise ValidationError(f"shares: must be > 0 to issue, got {shares}")
    entries = dict(cap_table.entries)
    entries[holder] = entries.get(holder, 0) + shares
    return CapTable(entries)


def transfer_shares(cap_table: CapTable, from_holder: str, to_holder: str, shares: int) -> CapTable:
    """Move shares between holders; the total never changes."""
    if shares <= 0:
        raise ValidationError(f"shares: must be > 0 to transfer, got {shares}")
    held = cap_table.shares_of(from_holder)
    if held < shares:
        raise ValidationError(
            f"shares: {from_holder} holds {held}, cannot transfer {shares}"
        )
    entries = dict(cap_table.entries)
    entries[from_holder] = held - shares
    entries[to_holder] = entries.get(to_holder, 0) + shares
    return CapTable(entries)


@dataclass(frozen=True)
class Transaction:
    """Double-entry record; debits and credits must balance to the cent."""

    debits: tuple[tuple[str, Money], ...]
    credits: tuple[tuple[str, Money], ...]
    memo: str = ""
    month: int = 0

    def __post_init__(self):
        d = sum(m.cents for _, m in self.debits)
        c = sum(m.cents for _, m in self.credits)
        if d != c:
            raise ValidationError(
                f"transaction: debits ({d}) != credits ({c}) for memo {self.memo!r}"
            )


@dataclass(frozen=True)
class ReserveFund:
    """Retained-earnings buffer deducted from profit before dividends."""

    balance: Money = ZERO
    contribution_rate: float = 0.10

    def __post_init__(self):
        if self.balance.cents < 0:
            raise ValidationError(f"reserve.balance: must be >= 0, got {self.balance}")
        if not 0.0 <= self.contribution_rate <= 1.0:
            raise ValidationError(
                f"reserve.contribution_rate: must be in [0, 1], got {self.contribution_rate}"
            )


def distribute_dividend(
    cap_table: CapTable, profit: Money, reserve: ReserveFund
) -> tuple[dict[str, Money], ReserveFund]:
    """Split a non-negative profit into per-holder payouts and a reserve contribution.

    The reserve takes floor(profit * contribution_rate); the remainder is paid
    pro-rata by share count, floored per holder, and the residual cents from
    flooring also go to the reserve. Payouts + reserve delta always equal the
    profit exactly.
    """
    if profit.cents < 0:
        raise ValidationError(f"profit: dividends require profit >= 0, got {profit}")
    total = cap_table.total_shares
    if total == 0:
        raise ValidationError("cap_table: cannot distribute dividends on an empty cap table")

    contribution = math.floor(profit.cents * reserve.contribution_rate)
    distributable = profit.cents - contribution

    payouts: dict[str, Money] = {}
    paid = 0
    for holder, shares in cap_table.entries.items():
        amount = distributable * shares // total
        payouts[holder] = Money(amount)
        paid += amount

    remainder = distributable - paid
    new_reserve = ReserveFund(
        Money(reserve.balance.cents + contribution + remainder), reserve.contribution_rate
    )
    return payouts, new_reserve


def liquidation_payouts(cap_table: CapTable, total_value: Money) -> dict[str, Money]:
    """Distribute a liquidation value pro-rata, conserving every cent.

    Floor pro-rata first, then hand the leftover cents out one at a time by
    largest fractional remainder (ties broken by holder id) so the payouts
    sum to total_value exactly.
    """
    total = cap_table.total_shares
    if total == 0:
        raise ValidationError("cap_table: cannot liquidate an empty cap table")
    if total_value.cents < 0:
        raise ValidationError(f"total_value: must be >= 0, got {total_value}")

    base: dict[str, int] = {}
    remainders: list[tuple[int, str]] = []
    paid = 0
    for holder, shares in cap_table.entries.items():
        exact = total_value.cents * shares
        amount = exact // total
        base[holder] = amount
        paid += amount
        remainders.append((exact % total, holder))

    leftover = total_value.cents - paid
    remainders.sort(key=lambda t: (-t[0], t[1]))
    for _, holder in remainders[:leftover]:
        base[holder] += 1
    return {holder: Money(c) for holder, c in base.items()}


def depreciate(purchase_price: Money, months_elapsed: int, monthly_rate: float = DEPRECIATION_RATE) -> Money:
    """Straight-line book value: purchase price minus a fixed monthly charge.

    The monthly charge is floor(rate * purchase price) in cents, and the value
    floors at zero. At the default 10% rate a price that is a whole multiple
    of 10 cents reaches zero at exactly month 10.
    """
    if months_elapsed < 0:
        raise ValidationError(f"months_elapsed: must be >= 0, got {months_elapsed}")
    if purchase_price.cents < 0:
        raise ValidationError(f"purchase_price: must be >= 0, got {purchase_price}")
    charge = math.floor(purchase_price.cents * monthly_rate)
    return Money(max(0, purchase_price.cents - months_elapsed * charge))


def depreciation_charge(purchase_price: Money, months_elapsed: int) -> Money:
    """Book-value decrease over the month following ``months_elapsed``."""
    return depreciate(purchase_price, months_elapsed) - depreciate(purchase_price, months_elapsed + 1)
