"""Company valuation: asset approach, P/E market approach, investor returns.

A young company is worth what it cost to start (asset approach); once it
pays steady dividends it is worth a P/E multiple of annual earnings
(market approach). Early backers are rewarded through the appreciation
between the two.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import DomainError, ValidationError
from .money import Money, round_half_away


class ValuationMethod(enum.Enum):
    ASSET_APPROACH = "asset_approach"
    MARKET_APPROACH = "market_approach"


@dataclass(frozen=True)
class ValuationParams:
    """Return target and timing assumptions behind the P/E multiple."""

    target_apr: float = 0.041
    pe_ratio: float | None = None  # derived from target_apr when omitted
    months_to_steady: int = 12

    def __post_init__(self):
        errs = []
        if self.target_apr <= 0:
            errs.append(f"valuation.target_apr: must be > 0, got {self.target_apr}")
        if self.pe_ratio is not None and self.pe_ratio <= 0:
            errs.append(f"valuation.pe_ratio: must be > 0, got {self.pe_ratio}")
        if self.months_to_steady < 1:
            errs.append(f"valuation.months_to_steady: must be >= 1, got {self.months_to_steady}")
        if errs:
            raise ValidationError(errs)

    @property
    def pe(self) -> float:
        return self.pe_ratio if self.pe_ratio is not None else pe_from_apr(self.target_apr)


@dataclass
class ValuationState:
    """Current valuation method and value; the pre-IPO value is fixed at founding."""

    method: ValuationMethod
    current_value: Money
    pre_ipo_value: Money


def pe_from_apr(apr: float) -> float:
    """Price-to-earnings multiple implied by a full-dividend annual return."""
    if apr <= 0:
        raise ValidationError(f"apr: must be > 0, got {apr}")
    return 1.0 / apr


def market_valuation(annual_earnings: Money, pe: float) -> Money:
    """Market-approach value: annual earnings times the P/E multiple."""
    if pe <= 0:
        raise ValidationError(f"pe: must be > 0, got {pe}")
    return Money(round_half_away(annual_earnings.cents * pe))


def asset_valuation(hardware_cost: Money, installation_cost: Money, other_startup_costs: Money) -> Money:
    """Asset-approach value: total cost to start the business."""
    for name, m in (
        ("hardware_cost", hardware_cost),
        ("installation_cost", installation_cost),
        ("other_startup_costs", other_startup_costs),
    ):
        if m.cents < 0:
            raise ValidationError(f"{name}: must be >= 0, got {m}")
    return hardware_cost + installation_cost + other_startup_costs


def preipo_apr(pe: float, steady_annual_profit: Money, pre_ipo_value: Money, months_to_steady: int) -> float:
    """Annualized return for a pre-IPO backer once the company trades at P/E.

    alpha = ((pe * P - I) / I) ** (12 / z) - 1, where I is the pre-IPO value
    and z the months until steady profit. When pe*P <= I and the exponent is
    fractional the power has no real value and a DomainError is raised.
    """
    if pre_ipo_value.cents <= 0:
        raise ValidationError(f"pre_ipo_value: must be > 0, got {pre_ipo_value}")
    if months_to_steady < 1:
        raise ValidationError(f"months_to_steady: must be >= 1, got {months_to_steady}")
    if pe <= 0 or steady_annual_profit.cents * pe <= 0:
        raise ValidationError("pe and steady_annual_profit must give pe * P > 0")

    base = (pe * steady_annual_profit.cents - pre_ipo_value.cents) / pre_ipo_value.cents
    exponent = 12.0 / months_to_steady
    if base < 0 and not float(exponent).is_integer():
        raise DomainError(
            f"pre-IPO return undefined: growth ratio {base:.6f} is negative and the "
            f"annualization exponent 12/{months_to_steady} is fractional"
        )
    if base < 0:
        return base ** int(exponent) - 1.0
    return base ** exponent - 1.0


def appreciation_over_preipo(market_value: Money, pre_ipo_value: Money) -> float:
    """Market value as a percentage of the pre-IPO value (100% = no appreciation)."""
    if pre_ipo_value.cents <= 0:
        raise ValidationError(f"pre_ipo_value: must be > 0, got {pre_ipo_value}")
    return 100.0 * market_value.cents / pre_ipo_value.cents


def proposer_reward(market_value: Money, esop_fraction: float) -> Money:
    """Value of the proposer's equity grant at a given market value."""
    if not 0.0 <= esop_fraction <= 1.0:
        raise ValidationError(f"esop_fraction: must be in [0, 1], got {esop_fraction}")
    return market_value.scale_round(esop_fraction)
