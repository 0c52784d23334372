"""Sensor micro-company economics: pricing, IPOs, dividends, valuation, virtualization."""

from .errors import (
    DomainError,
    InfeasibleError,
    SensorEconError,
    StateError,
    ValidationError,
)
from .ipo import FundingRound, IpoProposal, RoundState, Settlement, grant_esop, open_ipo, pledge, settle_ipo
from .ledger import (
    CapTable,
    ReserveFund,
    Transaction,
    depreciate,
    distribute_dividend,
    issue_equity,
    liquidation_payouts,
    transfer_shares,
)
from .money import Money, ZERO
from .pricing import (
    CostStructure,
    PriceUsageCurve,
    ServiceSpec,
    annual_revenue_per_user,
    interpolate_usage,
    monthly_profit,
    optimize_price,
)
from .scenario import ScenarioFile, load_curve, load_instance, load_scenario
from .simulate import (
    CompanyState,
    MonthlyStatement,
    ScenarioMonth,
    SensorCompany,
    SimulationReport,
    SweepResult,
    break_even_sweep,
    lifecycle_transition,
    run_scenario,
    step_month,
)
from .valuation import (
    ValuationMethod,
    ValuationParams,
    ValuationState,
    appreciation_over_preipo,
    asset_valuation,
    market_valuation,
    pe_from_apr,
    preipo_apr,
    proposer_reward,
)
from .virtualize import (
    CompanySite,
    VirtualAssignment,
    brute_force_portfolio,
    compatibility_score,
    optimize_portfolio,
)

__version__ = "0.1.0"
