"""Monthly stepping, lifecycle transitions, bankruptcy, and scenario runs."""

import random

import pytest

from sensorecon.errors import StateError
from sensorecon.ledger import CapTable, ReserveFund
from sensorecon.money import Money, ZERO
from sensorecon.pricing import CostStructure, PriceUsageCurve, ServiceSpec
from sensorecon.scenario import load_scenario
from sensorecon.simulate import (
    CompanyState,
    ScenarioMonth,
    SensorCompany,
    apply_esop_grant,
    break_even_sweep,
    lifecycle_transition,
    run_scenario,
    step_month,
)
from sensorecon.valuation import ValuationMethod, ValuationParams, ValuationState


def flat_curve(price_cents, usages):
    return PriceUsageCurve(
        points=((Money(0), usages), (Money(price_cents), usages), (Money(price_cents * 2), 0.0)),
        zero_pay_fraction=0.0,
    )


def make_company(
    *,
    price=100,
    usages=1.0,
    cash=100000,
    purchase=0,
    maintenance_pay=0,
    incentive_rate=0.05,
    reserve_rate=0.10,
    reserve_balance=0,
    shares=None,
    esop=0.0,
    steady=3,
):
    svc = ServiceSpec(
        id="svc",
        name="svc",
        curve=flat_curve(price, usages),
        unit_price=Money(price),
    )
    return SensorCompany(
        id="test-co",
        state=CompanyState.OPERATING,
        cap_table=CapTable(shares or {"A": 60, "B": 40}),
        cash=Money(cash),
        reserve=ReserveFund(Money(reserve_balance), reserve_rate),
        services=(svc,),
        costs=CostStructure(
            maintenance_hours_per_month=1.0 if maintenance_pay else 0.0,
            maintenance_hourly_rate=Money(maintenance_pay),
            incentive_rate=incentive_rate,
        ),
        purchase_price=Money(purchase),
        pre_ipo_value=Money(cash),
        valuation=ValuationState(ValuationMethod.ASSET_APPROACH, Money(cash), Money(cash)),
        valuation_params=ValuationParams(pe_ratio=24.4),
        esop_fraction=esop,
        steady_months=steady,
    )


class TestStepMonth:
    def test_zero_users_is_pure_cost(self):
        company = make_company(purchase=17900, maintenance_pay=1000)
        _, stmt = step_month(company, ScenarioMonth(1, 0))
        assert stmt.total_revenue == ZERO
        assert stmt.profit == Money(-(1000 + 1790))
        assert stmt.depreciation == Money(1790)

    def test_uptime_gates_incentive(self):
        down = make_company()
        _, stmt_down = step_month(down, ScenarioMonth(1, 10, uptime_ok=False))
        assert stmt_down.incentive_pay == ZERO
        up = make_company()
        _, stmt_up = step_month(up, ScenarioMonth(1, 10, uptime_ok=True))
        assert stmt_up.incentive_pay == Money(round(0.05 * stmt_up.total_revenue.cents))

    def test_statement_identities(self):
        company = make_company(purchase=11700, maintenance_pay=500)
        opening = company.cash
        for m in range(1, 13):
            _, stmt = step_month(company, ScenarioMonth(m, 25))
            assert stmt.cash_and_profit_identities_hold(opening)
            opening = stmt.closing_cash

    def test_wrong_state_rejected(self):
        company = make_company()
        company.state = CompanyState.BANKRUPT
        with pytest.raises(StateError):
            step_month(company, ScenarioMonth(1, 1))

    def test_revenue_monotone_in_users(self):
        revenues = []
        for users in range(0, 60, 5):
            company = make_company()
            _, stmt = step_month(company, ScenarioMonth(1, users))
            revenues.append(stmt.total_revenue.cents)
        assert revenues == sorted(revenues)

    def test_loss_draws_reserve_before_cash(self):
        company = make_company(usages=0.0, maintenance_pay=1000, reserve_balance=600)
        opening = company.cash
        _, stmt = step_month(company, ScenarioMonth(1, 0))
        assert stmt.profit == Money(-1000)
        assert stmt.reserve_delta == Money(-600)
        assert company.reserve.balance == ZERO
        assert company.cash == opening - Money(400)


class TestLifecycle:
    def run_profitable_months(self, company, months, users=50):
        history = []
        for m in range(1, months + 1):
            lifecycle_transition(company, history)
            _, stmt = step_month(company, ScenarioMonth(m, users))
            history.append(stmt)
        lifecycle_transition(company, history)
        return history

    def test_steady_after_three_profitable_months(self):
        company = make_company(shares={"A": 90}, esop=0.10)
        self.run_profitable_months(company, 3)
        assert company.state is CompanyState.STEADY_PROFIT
        assert company.esop_granted
        assert company.cap_table.shares_of("proposer") == 10
        assert company.valuation.method is ValuationMethod.MARKET_APPROACH

    def test_not_steady_after_two(self):
        company = make_company()
        self.run_profitable_months(company, 2)
        assert company.state is CompanyState.OPERATING

    def test_dividends_flow_only_after_transition(self):
        company = make_company(shares={"A": 1})
        history = self.run_profitable_months(company, 5)
        assert all(s.dividend_paid == ZERO for s in history[:3])
        assert all(s.dividend_paid.cents > 0 for s in history[3:])
        # dividend + reserve take the whole profit in steady months
        for s in history[3:]:
            assert s.dividend_paid + s.reserve_delta == s.profit

    def test_double_esop_grant_rejected(self):
        company = make_company(shares={"A": 90}, esop=0.10)
        apply_esop_grant(company)
        with pytest.raises(StateError):
            apply_esop_grant(company)

    def test_insolvency_liquidates(self):
        # cash $5, obligations $50, reserve 0 -> bankrupt before operating
        company = make_company(cash=500, purchase=10000, maintenance_pay=5000)
        company.months_operated = 2  # book value 8000
        lifecycle_transition(company, [])
        assert company.state is CompanyState.BANKRUPT
        assert company.liquidation is not None
        paid = sum(m.cents for m in company.liquidation.values())
        assert paid == 500 + 8000
        assert company.cash == ZERO

    def test_liquidation_conservation_randomized(self):
        rng = random.Random(321)
        for _ in range(300):
            cash = rng.randint(0, 3000)
            reserve = rng.randint(0, 2000)
            purchase = rng.randint(0, 40000)
            months = rng.randint(0, 12)
            company = make_company(
                cash=cash, purchase=purchase, maintenance_pay=5000, reserve_balance=reserve
            )
            company.months_operated = months
            book = company.book_value
            if cash + reserve >= 5000:
                continue  # still solvent; not the path under test
            lifecycle_transition(company, [])
            assert company.state is CompanyState.BANKRUPT
            paid = sum(m.cents for m in company.liquidation.values())
            assert paid == cash + reserve + book.cents


class TestRunScenario:
    def test_air_break_even_year(self, air_scenario_path):
        report = run_scenario(load_scenario(air_scenario_path))
        assert report.ipo_outcome == "funded"
        assert report.final_state == "operating"
        assert abs(report.cumulative_profit.cents) <= 2000  # within $20 of break-even

    def test_parking_break_even_year(self, parking_scenario_path):
        report = run_scenario(load_scenario(parking_scenario_path))
        assert abs(report.cumulative_profit.cents) <= 2000

    def test_parking_market_value_row(self, parking_scenario_path):
        report = run_scenario(load_scenario(parking_scenario_path))
        assert report.metrics["table"]["market_value_cents"] == 57950
        assert report.metrics["table"]["market_value_at_pe_cents"] == 57950
        assert report.metrics["notes"] == []

    def test_air_pe_inconsistency_flagged(self, air_scenario_path):
        report = run_scenario(load_scenario(air_scenario_path))
        assert report.metrics["table"]["market_value_cents"] == 390400
        assert report.metrics["table"]["market_value_at_pe_cents"] == 409920
        assert any("P/E" in note for note in report.metrics["notes"])

    def test_identical_runs_identical_reports(self, air_scenario_path):
        a = run_scenario(load_scenario(air_scenario_path))
        b = run_scenario(load_scenario(air_scenario_path))
        assert a == b

    def test_undersubscribed_ipo_terminates(self, air_scenario_path, tmp_path):
        import json

        doc = json.loads(air_scenario_path.read_text())
        doc["ipo"]["pledges"] = [{"month": 0, "investor": "only-one", "amount_cents": 49400}]
        for svc in doc["company"]["services"]:
            svc["curve_file"] = str(air_scenario_path.parent / svc["curve_file"])
        path = tmp_path / "under.scenario.json"
        path.write_text(json.dumps(doc))
        report = run_scenario(load_scenario(path))
        assert report.ipo_outcome == "terminated"
        assert report.final_state == "terminated"
        assert report.refunds == {"only-one": Money(49400)}
        assert report.statements == ()


class TestBreakEvenSweep:
    def test_air_break_even_43(self, air_scenario_path):
        result = break_even_sweep(load_scenario(air_scenario_path), range(0, 101))
        assert abs(result.break_even_users - 43) <= 2

    def test_parking_break_even_29(self, parking_scenario_path):
        result = break_even_sweep(load_scenario(parking_scenario_path), range(0, 101))
        assert abs(result.break_even_users - 29) <= 2

    def test_single_point_sweep(self, air_scenario_path):
        result = break_even_sweep(load_scenario(air_scenario_path), range(0, 1))
        assert len(result.rows) == 1
        assert result.rows[0].users == 0
        assert result.rows[0].annual_revenue == ZERO
        assert result.break_even_users is None

    def test_profit_equals_revenue_minus_cost(self, parking_scenario_path):
        result = break_even_sweep(load_scenario(parking_scenario_path), range(0, 40))
        for row in result.rows:
            assert row.profit == row.annual_revenue - row.annual_cost

    def test_cost_curve_affine_where_no_kink(self):
        # round-friendly scenario: revenue per user is exactly 100c/month,
        # incentive 5% of it is exact, so annual cost is affine in users.
        import json

        from sensorecon.scenario import ScenarioFile
        from sensorecon.valuation import ValuationParams

        svc = ServiceSpec(
            id="s",
            name="s",
            curve=flat_curve(100, 1.0),
        )
        scenario = ScenarioFile(
            name="affine",
            purchase_price=Money(12000),
            pre_ipo_value=Money(50000),
            esop_fraction=0.0,
            proposer_id="p",
            services=(svc,),
            costs=CostStructure(incentive_rate=0.05),
            funding_goal=Money(50000),
            share_price=Money(100),
            window_months=1,
            pledges=(),
            months=12,
            users=(10,) * 12,
            uptime=(True,) * 12,
            reserve_rate=0.0,
            steady_months=3,
            seed=0,
            valuation=ValuationParams(pe_ratio=24.4),
        )
        result = break_even_sweep(scenario, range(0, 30))
        costs = [r.annual_cost.cents for r in result.rows]
        second_diffs = [costs[i + 2] - 2 * costs[i + 1] + costs[i] for i in range(len(costs) - 2)]
        assert all(d == 0 for d in second_diffs)
