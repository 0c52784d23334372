"""Monthly simulation of a sensor company's life.

The tick is one month: demand is read off the optimized price curves,
costs and the uptime-gated incentive are deducted, dividends flow in the
steady-profit state, and the lifecycle machine handles the steady-profit
transition (with the proposer's equity grant), insolvency, and
liquidation. Everything is deterministic for a given scenario and seed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import DomainError, StateError, ValidationError
from .ipo import IpoProposal, grant_esop, open_ipo, pledge, settle_ipo, RoundState, Settlement
from .ledger import (
    CapTable,
    ReserveFund,
    Transaction,
    depreciate,
    depreciation_charge,
    distribute_dividend,
    liquidation_payouts,
)
from .money import Money, ZERO, round_half_away
from .pricing import (
    CostStructure,
    ServiceSpec,
    annual_revenue_per_user,
    interpolate_usage,
    optimize_price,
)
from .scenario import ScenarioFile
from .valuation import (
    ValuationMethod,
    ValuationParams,
    ValuationState,
    appreciation_over_preipo,
    market_valuation,
    preipo_apr,
    proposer_reward,
)


class CompanyState(enum.Enum):
    PROPOSED = "proposed"
    FUNDING = "funding"
    OPERATING = "operating"
    STEADY_PROFIT = "steady_profit"
    BANKRUPT = "bankrupt"
    TERMINATED = "terminated"


_ACTIVE_STATES = (CompanyState.OPERATING, CompanyState.STEADY_PROFIT)


@dataclass(frozen=True)
class ScenarioMonth:
    """One month of exogenous conditions."""

    month: int
    active_users: int
    uptime_ok: bool = True

    def __post_init__(self):
        if self.active_users < 0:
            raise ValidationError(f"active_users: must be >= 0, got {self.active_users}")


@dataclass(frozen=True)
class MonthlyStatement:
    """Cent-exact decomposition of one month's P&L and cash movement."""

    month: int
    revenue_by_service: tuple[Money, ...]
    marginal_costs: Money
    fixed_costs: Money
    maintenance_pay: Money
    incentive_pay: Money
    depreciation: Money
    profit: Money
    dividend_paid: Money
    reserve_delta: Money
    closing_cash: Money

    @property
    def total_revenue(self) -> Money:
        return Money(sum(m.cents for m in self.revenue_by_service))

    def cash_and_profit_identities_hold(self, opening_cash: Money) -> bool:
        """Profit identity and cash continuity.

        Profit nets out every cost line including depreciation; cash adds the
        depreciation back (it is a non-cash charge; the hardware was paid for
        at founding) and subtracts dividends and the reserve transfer.
        """
        profit_ok = self.profit == self.total_revenue - (
            self.marginal_costs
            + self.fixed_costs
            + self.maintenance_pay
            + self.incentive_pay
            + self.depreciation
        )
        cash_ok = self.closing_cash == (
            opening_cash + self.profit + self.depreciation - self.dividend_paid - self.reserve_delta
        )
        return profit_ok and cash_ok


@dataclass
class SensorCompany:
    """A funded, operating sensor micro-company."""

    id: str
    state: CompanyState
    cap_table: CapTable
    cash: Money
    reserve: ReserveFund
    services: tuple[ServiceSpec, ...]
    costs: CostStructure
    purchase_price: Money
    pre_ipo_value: Money
    valuation: ValuationState
    valuation_params: ValuationParams
    proposer_id: str = "proposer"
    esop_fraction: float = 0.0
    esop_granted: bool = False
    steady_months: int = 3
    founding_month: int = 0
    months_operated: int = 0
    liquidation: dict[str, Money] | None = None

    @property
    def book_value(self) -> Money:
        return depreciate(self.purchase_price, self.months_operated)

    def monthly_cash_obligations(self) -> Money:
        """Fixed cash outflow the company must cover every month."""
        svc_fixed = Money(sum(s.fixed_cost.cents for s in self.services))
        return self.costs.maintenance_pay + self.costs.admin_fixed + svc_fixed


def step_month(company: SensorCompany, month: ScenarioMonth) -> tuple[SensorCompany, MonthlyStatement]:
    """Run one month: revenue, costs, profit, dividends or reserve draw.

    Mutates and returns the company. Dividends are paid only in the
    steady-profit state; losses draw the reserve fund first, then cash. If
    even cash cannot absorb the loss the company goes bankrupt and is
    liquidated immediately.
    """
    if company.state not in _ACTIVE_STATES:
        raise StateError(f"cannot step a company in state {company.state.value}")

    users = month.active_users
    dep = depreciation_charge(company.purchase_price, company.months_operated)

    revenue_by_service = []
    marginal = 0
    svc_fixed = 0
    for svc in company.services:
        usage = interpolate_usage(svc.curve, svc.unit_price)
        paying = usage * users * svc.curve.paying_fraction
        revenue_by_service.append(Money(round_half_away(svc.unit_price.cents * paying)))
        marginal += round_half_away(svc.marginal_cost.cents * paying)
        svc_fixed += svc.fixed_cost.cents

    total_revenue = Money(sum(m.cents for m in revenue_by_service))
    fixed = company.costs.admin_fixed + Money(svc_fixed)
    maintenance = company.costs.maintenance_pay
    incentive = (
        total_revenue.scale_round(company.costs.incentive_rate) if month.uptime_ok else ZERO
    )
    marginal_costs = Money(marginal)
    profit = total_revenue - marginal_costs - fixed - maintenance - incentive - dep

    dividend = ZERO
    reserve_delta = ZERO
    if profit.cents > 0 and company.state is CompanyState.STEADY_PROFIT:
        payouts, new_reserve = distribute_dividend(company.cap_table, profit, company.reserve)
        dividend = Money(sum(m.cents for m in payouts.values()))
        reserve_delta = new_reserve.balance - company.reserve.balance
        # Runtime conservation check: distributed profit must balance exactly.
        Transaction(
            debits=((company.id, profit),),
            credits=tuple(payouts.items()) + (("reserve", reserve_delta),),
            memo=f"dividend month {month.month}",
            month=month.month,
        )
        company.reserve = new_reserve
    elif profit.cents < 0:
        draw = min(company.reserve.balance.cents, -profit.cents)
        reserve_delta = Money(-draw)
        company.reserve = ReserveFund(
            Money(company.reserve.balance.cents - draw), company.reserve.contribution_rate
        )

    closing_cash = company.cash + profit + dep - dividend - reserve_delta
    company.cash = closing_cash
    company.months_operated += 1

    statement = MonthlyStatement(
        month=month.month,
        revenue_by_service=tuple(revenue_by_service),
        marginal_costs=marginal_costs,
        fixed_costs=fixed,
        maintenance_pay=maintenance,
        incentive_pay=incentive,
        depreciation=dep,
        profit=profit,
        dividend_paid=dividend,
        reserve_delta=reserve_delta,
        closing_cash=closing_cash,
    )

    if closing_cash.cents < 0:
        _liquidate(company, available_cash=Money(max(0, closing_cash.cents)))
    return company, statement


def apply_esop_grant(company: SensorCompany) -> SensorCompany:
    """Issue the proposer's equity grant; a second grant is an error."""
    if company.esop_granted:
        raise StateError(f"ESOP already granted for {company.id}")
    company.cap_table = grant_esop(company.cap_table, company.proposer_id, company.esop_fraction)
    company.esop_granted = True
    return company


def _liquidate(company: SensorCompany, available_cash: Money | None = None) -> None:
    """Bankruptcy: distribute remaining cash, reserve, and book value pro-rata."""
    cash = company.cash if available_cash is None else available_cash
    value = cash + company.reserve.balance + company.book_value
    company.liquidation = liquidation_payouts(company.cap_table, value)
    # Runtime conservation check on the liquidation split.
    Transaction(
        debits=((company.id, value),),
        credits=tuple(company.liquidation.items()),
        memo=f"liquidation of {company.id}",
    )
    company.state = CompanyState.BANKRUPT
    company.cash = ZERO
    company.reserve = ReserveFund(ZERO, company.reserve.contribution_rate)


def lifecycle_transition(company: SensorCompany, history: list[MonthlyStatement]) -> SensorCompany:
    """Advance the lifecycle machine between months.

    Insolvency first: a company whose cash plus reserve cannot cover the
    coming month's fixed cash obligations is bankrupted and liquidated (this
    month's prospective revenue does not count toward the bills). Otherwise an
    operating company with the last k months profitable becomes steady-profit,
    switches to the market valuation approach, and grants the proposer's ESOP.
    """
    if company.state not in _ACTIVE_STATES:
        return company

    if (company.cash + company.reserve.balance).cents < company.monthly_cash_obligations().cents:
        _liquidate(company)
        return company

    if company.state is CompanyState.OPERATING:
        k = company.steady_months
        if len(history) >= k and all(s.profit.cents > 0 for s in history[-k:]):
            company.state = CompanyState.STEADY_PROFIT
            if company.esop_fraction > 0 and not company.esop_granted:
                apply_esop_grant(company)

    if company.state is CompanyState.STEADY_PROFIT:
        trailing = Money(sum(s.profit.cents for s in history[-12:]))
        company.valuation = ValuationState(
            method=ValuationMethod.MARKET_APPROACH,
            current_value=market_valuation(trailing, company.valuation_params.pe),
            pre_ipo_value=company.pre_ipo_value,
        )
    else:
        company.valuation = ValuationState(
            method=ValuationMethod.ASSET_APPROACH,
            current_value=company.cash + company.reserve.balance + company.book_value,
            pre_ipo_value=company.pre_ipo_value,
        )
    return company


@dataclass(frozen=True)
class SimulationReport:
    """Everything a scenario run produces, ready for deterministic serialization."""

    scenario_name: str
    ipo_outcome: str
    total_pledged: Money
    ipo_cash: Money
    refunds: dict[str, Money]
    statements: tuple[MonthlyStatement, ...]
    final_state: str
    final_cash: Money
    final_reserve: Money
    cap_table: dict[str, int]
    esop_granted: bool
    valuation_method: str
    valuation_value: Money
    prices: dict[str, Money]
    revenue_per_user_year: Money
    cumulative_profit: Money
    liquidation: dict[str, Money] | None
    metrics: dict


def found_company(scenario: ScenarioFile, cap_table: CapTable, cash: Money) -> SensorCompany:
    """Build the operating company right after a funded IPO.

    Hardware is bought immediately (cash drops by the purchase price) and
    service prices are set by revenue maximization; the optimal price does not
    depend on the user count, so it is fixed once at founding.
    """
    services = tuple(
        svc.with_price(optimize_price(svc, 1, "revenue")[0]) for svc in scenario.services
    )
    company = SensorCompany(
        id=scenario.name,
        state=CompanyState.OPERATING,
        cap_table=cap_table,
        cash=cash - scenario.purchase_price,
        reserve=ReserveFund(ZERO, scenario.reserve_rate),
        services=services,
        costs=scenario.costs,
        purchase_price=scenario.purchase_price,
        pre_ipo_value=scenario.pre_ipo_value,
        valuation=ValuationState(
            method=ValuationMethod.ASSET_APPROACH,
            current_value=scenario.pre_ipo_value,
            pre_ipo_value=scenario.pre_ipo_value,
        ),
        valuation_params=scenario.valuation,
        proposer_id=scenario.proposer_id,
        esop_fraction=scenario.esop_fraction,
        steady_months=scenario.steady_months,
    )
    return company


def run_ipo(scenario: ScenarioFile) -> tuple[Settlement, Money]:
    """Open the round, apply the pledge schedule in order, settle at window end."""
    proposal = IpoProposal(
        company_id=scenario.name,
        funding_goal=scenario.funding_goal,
        share_price=scenario.share_price,
        window_months=scenario.window_months,
        esop_fraction=scenario.esop_fraction,
        proposer_id=scenario.proposer_id,
    )
    round_ = open_ipo(proposal)
    for entry in sorted(scenario.pledges, key=lambda p: p.month):
        round_ = pledge(round_, entry.investor, entry.amount)
    total = round_.total_pledged
    _, settlement = settle_ipo(round_)
    # Runtime conservation check: pledges either become cash or come back.
    refunded = Money(sum(m.cents for m in settlement.refunds.values()))
    Transaction(
        debits=((f"{scenario.name}-investors", total),),
        credits=((scenario.name, settlement.cash), (f"{scenario.name}-refunds", refunded)),
        memo=f"IPO settlement for {scenario.name}",
    )
    return settlement, total


def _simulate_months(
    company: SensorCompany, users: tuple[int, ...], uptime: tuple[bool, ...]
) -> list[MonthlyStatement]:
    history: list[MonthlyStatement] = []
    for i, (u, up) in enumerate(zip(users, uptime), start=1):
        company = lifecycle_transition(company, history)
        if company.state is CompanyState.BANKRUPT:
            break
        _, stmt = step_month(company, ScenarioMonth(month=i, active_users=u, uptime_ok=up))
        history.append(stmt)
        if company.state is CompanyState.BANKRUPT:
            break
    else:
        lifecycle_transition(company, history)
    return history


def run_scenario(scenario: ScenarioFile) -> SimulationReport:
    """Full lifecycle: IPO, founding, monthly operation, metrics."""
    settlement, total_pledged = run_ipo(scenario)

    if settlement.state is not RoundState.FUNDED:
        return SimulationReport(
            scenario_name=scenario.name,
            ipo_outcome="terminated",
            total_pledged=total_pledged,
            ipo_cash=ZERO,
            refunds=settlement.refunds,
            statements=(),
            final_state=CompanyState.TERMINATED.value,
            final_cash=ZERO,
            final_reserve=ZERO,
            cap_table={},
            esop_granted=False,
            valuation_method=ValuationMethod.ASSET_APPROACH.value,
            valuation_value=ZERO,
            prices={},
            revenue_per_user_year=ZERO,
            cumulative_profit=ZERO,
            liquidation=None,
            metrics=_metrics(scenario, None, []),
        )

    company = found_company(scenario, settlement.cap_table, settlement.cash)
    history = _simulate_months(company, scenario.users, scenario.uptime)

    return SimulationReport(
        scenario_name=scenario.name,
        ipo_outcome="funded",
        total_pledged=total_pledged,
        ipo_cash=settlement.cash,
        refunds=settlement.refunds,
        statements=tuple(history),
        final_state=company.state.value,
        final_cash=company.cash,
        final_reserve=company.reserve.balance,
        cap_table=dict(company.cap_table.entries),
        esop_granted=company.esop_granted,
        valuation_method=company.valuation.method.value,
        valuation_value=company.valuation.current_value,
        prices={s.id: s.unit_price for s in company.services},
        revenue_per_user_year=annual_revenue_per_user(list(company.services)),
        cumulative_profit=Money(sum(s.profit.cents for s in history)),
        liquidation=company.liquidation,
        metrics=_metrics(scenario, company, history),
    )


@dataclass(frozen=True)
class SweepRow:
    users: int
    annual_revenue: Money
    annual_cost: Money
    profit: Money


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    break_even_users: int | None


def break_even_sweep(scenario: ScenarioFile, user_range: range) -> SweepResult:
    """One first-operational-year simulation per user count.

    Returns per-count annual revenue, annual cost, and cumulative profit, and
    the smallest user count whose first-year profit is non-negative.
    """
    if len(user_range) == 0:
        raise ValidationError("user_range: must be non-empty")
    months = 12
    uptime = tuple(scenario.uptime[:months]) + (True,) * max(0, months - len(scenario.uptime))

    rows = []
    break_even = None
    for u in user_range:
        cap_table = CapTable({"sweep": max(1, scenario.funding_goal.cents // scenario.share_price.cents)})
        company = found_company(scenario, cap_table, scenario.funding_goal)
        history = _simulate_months(company, (u,) * months, uptime)
        revenue = Money(sum(s.total_revenue.cents for s in history))
        cost = Money(
            sum(
                (s.marginal_costs + s.fixed_costs + s.maintenance_pay + s.incentive_pay + s.depreciation).cents
                for s in history
            )
        )
        profit = revenue - cost
        rows.append(SweepRow(users=u, annual_revenue=revenue, annual_cost=cost, profit=profit))
        if break_even is None and profit.cents >= 0:
            break_even = u
    return SweepResult(rows=tuple(rows), break_even_users=break_even)


def _metrics(scenario: ScenarioFile, company: SensorCompany | None, history: list[MonthlyStatement]) -> dict:
    """Valuation metrics and the reference-table mirror, with cross-check notes."""
    params = scenario.valuation
    pe = params.pe
    notes: list[str] = []
    ref = scenario.reference_table

    trailing_profit = Money(sum(s.profit.cents for s in history[-12:]))
    income = ref.income_per_year if ref is not None else trailing_profit
    market_at_pe = market_valuation(income, pe) if income.cents > 0 else ZERO
    table_market = ref.market_value if (ref is not None and ref.market_value is not None) else market_at_pe

    if ref is not None and ref.market_value is not None:
        gap = abs(ref.market_value.cents - market_at_pe.cents)
        if gap > 100:
            implied = ref.market_value.cents / income.cents if income.cents else float("nan")
            notes.append(
                f"P/E inconsistency: income {income} at P/E {pe:g} gives {market_at_pe}, "
                f"but the reference table lists {ref.market_value} (implied P/E {implied:.2f}); "
                "both values are reported"
            )

    apr_value = None
    if income.cents > 0:
        try:
            apr_value = preipo_apr(pe, income, scenario.pre_ipo_value, params.months_to_steady)
        except DomainError as exc:
            notes.append(f"pre-IPO APR not computable: {exc}")

    appreciation_raw = appreciation_over_preipo(table_market, scenario.pre_ipo_value)
    reward = proposer_reward(table_market, scenario.esop_fraction)

    table = {
        "pe_used": pe,
        "implied_apr": 1.0 / pe,
        "income_yr_cents": income.cents,
        "market_value_cents": table_market.cents,
        "market_value_at_pe_cents": market_at_pe.cents,
        "users": ref.users if ref is not None else max(scenario.users, default=0),
        "return_over_preipo_percent": int(appreciation_raw),
        "return_over_preipo_percent_raw": appreciation_raw,
        "preipo_apr": apr_value,
        "months_to_steady": params.months_to_steady,
        "proposer_reward_cents": reward.cents,
        "proposer_reward_dollars": round_half_away(reward.cents / 100.0),
        "esop_fraction": scenario.esop_fraction,
        "pre_ipo_value_cents": scenario.pre_ipo_value.cents,
    }
    if ref is not None:
        table["ipo_value_cents"] = {
            "assets": ref.ipo_assets.cents,
            "working_capital": ref.ipo_working_capital.cents,
        }
        table["admin_pay"] = ref.admin_pay

    return {"table": table, "notes": notes}
