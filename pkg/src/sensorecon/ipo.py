"""All-or-nothing IPO rounds and the proposer's equity grant.

A funding round either reaches its goal and turns pledges into a cap table
(excess refunded in reverse arrival order), or it terminates and every
pledge is refunded in full. Retained cash is always exactly the goal or
exactly zero.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from .errors import StateError, ValidationError
from .ledger import CapTable, issue_equity
from .money import Money, ZERO, round_half_away


class RoundState(enum.Enum):
    OPEN = "open"
    FUNDED = "funded"
    TERMINATED = "terminated"


@dataclass(frozen=True)
class IpoProposal:
    """Deployment plan put up for all-or-nothing funding."""

    company_id: str
    funding_goal: Money
    share_price: Money = Money(100)
    window_months: int = 3
    esop_fraction: float = 0.0
    proposer_id: str = "proposer"

    def validate(self) -> list[str]:
        errs = []
        if self.funding_goal.cents <= 0:
            errs.append(f"ipo.funding_goal: must be > 0, got {self.funding_goal}")
        if self.share_price.cents <= 0:
            errs.append(f"ipo.share_price: must be > 0, got {self.share_price}")
        elif self.funding_goal.cents % self.share_price.cents != 0:
            errs.append(
                f"ipo.funding_goal: {self.funding_goal} is not a whole number of "
                f"shares at {self.share_price}"
            )
        if self.window_months < 1:
            errs.append(f"ipo.window_months: must be >= 1, got {self.window_months}")
        if not 0.0 <= self.esop_fraction < 1.0:
            errs.append(f"ipo.esop_fraction: must be in [0, 1), got {self.esop_fraction}")
        return errs


@dataclass(frozen=True)
class FundingRound:
    """An IPO in progress: ordered pledges against a fixed goal."""

    proposal: IpoProposal
    pledges: tuple[tuple[str, Money], ...] = ()
    state: RoundState = RoundState.OPEN

    @property
    def total_pledged(self) -> Money:
        return Money(sum(m.cents for _, m in self.pledges))


@dataclass(frozen=True)
class Settlement:
    """Outcome of settling a round; refunds + retained cash equal total pledges."""

    state: RoundState
    cash: Money
    cap_table: CapTable | None
    refunds: dict[str, Money] = field(default_factory=dict)


def open_ipo(proposal: IpoProposal) -> FundingRound:
    errs = proposal.validate()
    if errs:
        raise ValidationError(errs)
    return FundingRound(proposal=proposal)


def pledge(round_: FundingRound, investor: str, amount: Money) -> FundingRound:
    """Record a pledge; oversubscription is allowed and resolved at settlement."""
    if round_.state is not RoundState.OPEN:
        raise StateError(f"cannot pledge into a {round_.state.value} round")
    if amount.cents <= 0:
        raise ValidationError(f"pledge.amount: must be > 0, got {amount}")
    if amount.cents % round_.proposal.share_price.cents != 0:
        raise ValidationError(
            f"pledge.amount: {amount} is not a whole number of shares at "
            f"{round_.proposal.share_price}"
        )
    return replace(round_, pledges=round_.pledges + ((investor, amount),))


def settle_ipo(round_: FundingRound) -> tuple[FundingRound, Settlement]:
    """Close the round: all-or-nothing.

    If pledges reach the goal, shares are issued first-come-first-served up to
    the goal and any excess is refunded; otherwise every pledge is refunded in
    full and the company is terminated.
    """
    if round_.state is not RoundState.OPEN:
        raise StateError(f"round already settled ({round_.state.value})")

    goal = round_.proposal.funding_goal
    share_price = round_.proposal.share_price
    total = round_.total_pledged

    refunds: dict[str, Money] = {}
    if total.cents < goal.cents:
        for investor, amount in round_.pledges:
            refunds[investor] = refunds.get(investor, ZERO) + amount
        settled = replace(round_, state=RoundState.TERMINATED)
        return settled, Settlement(RoundState.TERMINATED, ZERO, None, refunds)

    cap_table = CapTable()
    remaining = goal.cents
    for investor, amount in round_.pledges:
        accepted = min(remaining, amount.cents)
        if accepted:
            cap_table = issue_equity(cap_table, investor, accepted // share_price.cents)
            remaining -= accepted
        excess = amount.cents - accepted
        if excess:
            refunds[investor] = refunds.get(investor, ZERO) + Money(excess)
    settled = replace(round_, state=RoundState.FUNDED)
    return settled, Settlement(RoundState.FUNDED, goal, cap_table, refunds)


def grant_esop(cap_table: CapTable, proposer_id: str, esop_fraction: float) -> CapTable:
    """Dilutive issuance bringing the proposer to the target ownership fraction.

    Issues round((f * total - held) / (1 - f)) new shares to the proposer,
    which lands the achieved fraction within one share of the target and
    never touches other holders' counts. A no-op if the proposer already
    holds at least the target.
    """
    if not 0.0 <= esop_fraction < 1.0:
        raise ValidationError(f"esop_fraction: must be in [0, 1), got {esop_fraction}")
    if esop_fraction == 0.0:
        return cap_table
    total = cap_table.total_shares
    held = cap_table.shares_of(proposer_id)
    exact = (esop_fraction * total - held) / (1.0 - esop_fraction)
    shares = round_half_away(exact)
    if shares <= 0:
        return cap_table
    return issue_equity(cap_table, proposer_id, shares)
