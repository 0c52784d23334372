"""Demand curves, profit arithmetic, and revenue-maximizing price selection.

A service's demand is a survey-derived piecewise-linear curve from unit
price to expected usages per user per month. Price optimization is an
exhaustive 1-cent grid search over the surveyed price span, so the chosen
price is exact, reproducible, and independent of any solver.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, replace

from .errors import ValidationError
from .money import Money, ZERO, round_half_away

#: Fraction of surveyed users who only use a service when it is free.
DEFAULT_ZERO_PAY_FRACTION = 99 / 350

#: Objective values closer than this are ties; ties resolve to the lower price.
TIE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PriceUsageCurve:
    """Piecewise-linear demand: unit price (cents) -> usages per user per month.

    Prices must strictly increase and usages must be non-increasing across the
    points (weakly decreasing demand). Below the first surveyed price the
    usage clamps to the first value; above the last surveyed price demand is
    zero.
    """

    points: tuple[tuple[Money, float], ...]
    zero_pay_fraction: float = DEFAULT_ZERO_PAY_FRACTION

    def __post_init__(self):
        errs = []
        if len(self.points) < 2:
            errs.append("curve.points: at least 2 surveyed points required")
        prev_price, prev_usage = None, None
        for i, (price, usage) in enumerate(self.points):
            if price.cents < 0:
                errs.append(f"curve.points[{i}].price: must be >= 0, got {price}")
            if usage < 0:
                errs.append(f"curve.points[{i}].usages: must be >= 0, got {usage}")
            if prev_price is not None and price.cents <= prev_price:
                errs.append(f"curve.points[{i}].price: prices must strictly increase")
            if prev_usage is not None and usage > prev_usage:
                errs.append(f"curve.points[{i}].usages: usages must be non-increasing")
            prev_price, prev_usage = price.cents, usage
        if not 0.0 <= self.zero_pay_fraction <= 1.0:
            errs.append(
                f"curve.zero_pay_fraction: must be in [0, 1], got {self.zero_pay_fraction}"
            )
        if errs:
            raise ValidationError(errs)

    @property
    def paying_fraction(self) -> float:
        return 1.0 - self.zero_pay_fraction

    @property
    def price_cents(self) -> list[int]:
        return [p.cents for p, _ in self.points]


@dataclass(frozen=True)
class ServiceSpec:
    """One priced data service offered by a sensor company."""

    id: str
    name: str
    curve: PriceUsageCurve
    unit_price: Money = ZERO
    marginal_cost: Money = ZERO
    fixed_cost: Money = ZERO  # per month, e.g. an app licence

    def __post_init__(self):
        errs = []
        if self.unit_price.cents < 0:
            errs.append(f"service.{self.id}.unit_price: must be >= 0")
        if self.marginal_cost.cents < 0:
            errs.append(f"service.{self.id}.marginal_cost: must be >= 0")
        if self.fixed_cost.cents < 0:
            errs.append(f"service.{self.id}.fixed_cost: must be >= 0")
        if errs:
            raise ValidationError(errs)

    def with_price(self, price: Money) -> "ServiceSpec":
        return replace(self, unit_price=price)


@dataclass(frozen=True)
class CostStructure:
    """Company-level monthly cost parameters.

    The company fixed cost F for a month is admin fees + maintenance pay +
    that month's depreciation charge; the incentive is a revenue share paid
    only for months with good uptime.
    """

    maintenance_hours_per_month: float = 0.0
    maintenance_hourly_rate: Money = ZERO
    admin_fixed: Money = ZERO
    incentive_rate: float = 0.05

    def __post_init__(self):
        errs = []
        if self.maintenance_hours_per_month < 0:
            errs.append("costs.maintenance_hours_per_month: must be >= 0")
        if self.maintenance_hourly_rate.cents < 0:
            errs.append("costs.maintenance_hourly_rate: must be >= 0")
        if self.admin_fixed.cents < 0:
            errs.append("costs.admin_fixed: must be >= 0")
        if not 0.0 <= self.incentive_rate <= 1.0:
            errs.append(f"costs.incentive_rate: must be in [0, 1], got {self.incentive_rate}")
        if errs:
            raise ValidationError(errs)

    @property
    def maintenance_pay(self) -> Money:
        return Money(round_half_away(self.maintenance_hours_per_month * self.maintenance_hourly_rate.cents))

    def fixed_total(self, depreciation: Money = ZERO) -> Money:
        return self.admin_fixed + self.maintenance_pay + depreciation


def interpolate_usage(curve: PriceUsageCurve, price: Money) -> float:
    """Expected usages per user per month at a unit price.

    Linear between surveyed points; clamps to the first usage below the
    surveyed span; zero above it.
    """
    if price.cents < 0:
        raise ValidationError(f"price: must be >= 0, got {price}")
    prices = curve.price_cents
    p = price.cents
    if p <= prices[0]:
        return curve.points[0][1]
    if p > prices[-1]:
        return 0.0
    hi = bisect_right(prices, p)
    if prices[hi - 1] == p:
        return curve.points[hi - 1][1]
    (p_lo, u_lo), (p_hi, u_hi) = curve.points[hi - 1], curve.points[hi]
    t = (p - p_lo.cents) / (p_hi.cents - p_lo.cents)
    return u_lo + t * (u_hi - u_lo)


def monthly_profit(
    services: list[ServiceSpec],
    usages: list[float],
    costs: CostStructure,
    depreciation: Money = ZERO,
) -> Money:
    """Company profit for one month: sum of per-service margins minus fixed costs.

    P = sum_i ((price_i - marginal_i) * n_i - service_fixed_i) - F, truncated
    toward zero at the final step only.
    """
    if len(usages) != len(services):
        raise ValidationError(
            f"usages: length {len(usages)} does not match services length {len(services)}"
        )
    total = 0.0
    for svc, n in zip(services, usages):
        if n < 0:
            raise ValidationError(f"usages: must be >= 0, got {n} for {svc.id}")
        total += (svc.unit_price.cents - svc.marginal_cost.cents) * n - svc.fixed_cost.cents
    total -= costs.fixed_total(depreciation).cents
    return Money(int(total))


def _objective_at(service: ServiceSpec, price_cents: int, user_count: int, objective: str) -> float:
    usage = interpolate_usage(service.curve, Money(price_cents))
    margin = price_cents if objective == "revenue" else price_cents - service.marginal_cost.cents
    return margin * usage * user_count * service.curve.paying_fraction


def optimize_price(
    service: ServiceSpec, user_count: int, objective: str = "revenue"
) -> tuple[Money, Money]:
    """Pick the price maximizing expected monthly revenue (or margin).

    Evaluates every whole cent across the surveyed price span (which includes
    all surveyed points); ties within 1e-9 resolve to the lowest price. The
    returned expected value is rounded to cents.
    """
    if user_count < 0:
        raise ValidationError(f"user_count: must be >= 0, got {user_count}")
    if objective not in ("revenue", "profit"):
        raise ValidationError(f"objective: must be 'revenue' or 'profit', got {objective!r}")

    lo = service.curve.price_cents[0]
    hi = service.curve.price_cents[-1]
    best_price, best_value = lo, _objective_at(service, lo, user_count, objective)
    for p in range(lo + 1, hi + 1):
        value = _objective_at(service, p, user_count, objective)
        if value > best_value + TIE_TOLERANCE:
            best_price, best_value = p, value
    return Money(best_price), Money(round_half_away(best_value))


def annual_revenue_per_user(services: list[ServiceSpec]) -> Money:
    """Expected yearly revenue from one potential user across all services.

    Assumes unit prices have already been optimized; applies each curve's
    zero-pay fraction.
    """
    monthly = 0.0
    for svc in services:
        usage = interpolate_usage(svc.curve, svc.unit_price)
        monthly += svc.unit_price.cents * usage * svc.curve.paying_fraction
    return Money(round_half_away(12.0 * monthly))
