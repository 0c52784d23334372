"""Scenario, demand-curve, and virtualization-instance files.

Everything the simulator consumes is JSON with money as integer cents.
Loading validates the whole file and reports every problem at once, each
message prefixed with the offending field path.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .errors import ValidationError
from .money import Money
from .pricing import CostStructure, PriceUsageCurve, ServiceSpec
from .valuation import ValuationParams
from .virtualize import CompanySite


@dataclass(frozen=True)
class PledgeEntry:
    month: int
    investor: str
    amount: Money


@dataclass(frozen=True)
class ReferenceTable:
    """Published case-study financial metrics the report mirrors and cross-checks."""

    ipo_assets: Money
    ipo_working_capital: Money
    income_per_year: Money
    market_value: Money | None
    users: int
    admin_pay: str


@dataclass(frozen=True)
class ScenarioFile:
    name: str
    # company block
    purchase_price: Money
    pre_ipo_value: Money
    esop_fraction: float
    proposer_id: str
    services: tuple[ServiceSpec, ...]
    costs: CostStructure
    # ipo block
    funding_goal: Money
    share_price: Money
    window_months: int
    pledges: tuple[PledgeEntry, ...]
    # simulation block
    months: int
    users: tuple[int, ...]
    uptime: tuple[bool, ...]
    reserve_rate: float
    steady_months: int
    seed: int
    # valuation block
    valuation: ValuationParams
    reference_table: ReferenceTable | None = None

    def to_dict(self) -> dict:
        """Canonical dict form (curves inline) suitable for re-loading."""
        doc = {
            "name": self.name,
            "company": {
                "purchase_price_cents": self.purchase_price.cents,
                "pre_ipo_value_cents": self.pre_ipo_value.cents,
                "esop_fraction": self.esop_fraction,
                "proposer_id": self.proposer_id,
                "services": [
                    {
                        "id": s.id,
                        "name": s.name,
                        "marginal_cost_cents": s.marginal_cost.cents,
                        "fixed_cost_cents_per_month": s.fixed_cost.cents,
                        "curve": {
                            "zero_pay_fraction": s.curve.zero_pay_fraction,
                            "points": [
                                {
                                    "price_cents": p.cents,
                                    "usages_per_user_per_month": u,
                                }
                                for p, u in s.curve.points
                            ],
                        },
                    }
                    for s in self.services
                ],
                "costs": {
                    "maintenance_hours_per_month": self.costs.maintenance_hours_per_month,
                    "maintenance_hourly_rate_cents": self.costs.maintenance_hourly_rate.cents,
                    "admin_fixed_cents_per_month": self.costs.admin_fixed.cents,
                    "incentive_rate": self.costs.incentive_rate,
                },
            },
            "ipo": {
                "funding_goal_cents": self.funding_goal.cents,
                "share_price_cents": self.share_price.cents,
                "window_months": self.window_months,
                "pledges": [
                    {"month": p.month, "investor": p.investor, "amount_cents": p.amount.cents}
                    for p in self.pledges
                ],
            },
            "simulation": {
                "months": self.months,
                "users": list(self.users),
                "uptime": list(self.uptime),
                "reserve_rate": self.reserve_rate,
                "steady_months": self.steady_months,
                "seed": self.seed,
            },
            "valuation": {
                "target_apr": self.valuation.target_apr,
                "pe_ratio": self.valuation.pe_ratio,
                "months_to_steady": self.valuation.months_to_steady,
            },
        }
        if self.reference_table is not None:
            ref = self.reference_table
            doc["valuation"]["reference_table"] = {
                "ipo_assets_cents": ref.ipo_assets.cents,
                "ipo_working_capital_cents": ref.ipo_working_capital.cents,
                "income_yr_cents": ref.income_per_year.cents,
                "market_value_cents": None if ref.market_value is None else ref.market_value.cents,
                "users": ref.users,
                "admin_pay": ref.admin_pay,
            }
        return doc


_REQUIRED = object()


class _Reader:
    """Accumulates field-path-tagged validation errors while pulling typed values."""

    def __init__(self):
        self.errors: list[str] = []

    def fail(self, path: str, message: str) -> None:
        self.errors.append(f"{path}: {message}")

    def get(self, obj: dict, path: str, key: str, kind, default=_REQUIRED):
        full = f"{path}.{key}" if path else key
        if key not in obj:
            if default is not _REQUIRED:
                return default
            self.fail(full, "missing required field")
            return None
        value = obj[key]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if kind is int and (not isinstance(value, int) or isinstance(value, bool)):
            self.fail(full, f"expected an integer, got {value!r}")
            return None
        if not isinstance(value, kind):
            self.fail(full, f"expected {kind.__name__}, got {value!r}")
            return None
        return value

    def money(self, obj: dict, path: str, key: str, minimum: int | None = None, default=None):
        full = f"{path}.{key}" if path else key
        if key not in obj:
            if default is not None:
                return default
            self.fail(full, "missing required field")
            return Money(0)
        value = obj[key]
        if not isinstance(value, int) or isinstance(value, bool):
            self.fail(full, f"money must be an integer cent amount, got {value!r}")
            return Money(0)
        if minimum is not None and value < minimum:
            self.fail(full, f"must be >= {minimum}, got {value}")
            return Money(max(value, minimum) if minimum is not None else value)
        return Money(value)

    def raise_if_failed(self) -> None:
        if self.errors:
            raise ValidationError(self.errors)


def _read_json(path: Path, r: _Reader) -> dict | None:
    if not path.exists():
        r.fail(str(path), "file does not exist")
        return None
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        r.fail(str(path), f"invalid JSON ({exc})")
        return None
    if not isinstance(doc, dict):
        r.fail(str(path), "top level must be a JSON object")
        return None
    return doc


def _parse_curve(doc: dict, path: str, r: _Reader) -> PriceUsageCurve | None:
    zero_pay = r.get(doc, path, "zero_pay_fraction", float, default=99 / 350)
    if zero_pay is None:
        zero_pay = 99 / 350  # type error already recorded; keep collecting
    raw_points = doc.get("points")
    if not isinstance(raw_points, list) or not raw_points:
        r.fail(f"{path}.points", "expected a non-empty array of points")
        return None
    points = []
    for i, pt in enumerate(raw_points):
        if not isinstance(pt, dict):
            r.fail(f"{path}.points[{i}]", "expected an object")
            return None
        price = r.money(pt, f"{path}.points[{i}]", "price_cents", minimum=0)
        usage = r.get(pt, f"{path}.points[{i}]", "usages_per_user_per_month", float)
        if usage is None:
            return None
        points.append((price, usage))
    try:
        return PriceUsageCurve(points=tuple(points), zero_pay_fraction=zero_pay)
    except ValidationError as exc:
        for msg in exc.errors:
            r.fail(path, msg)
        return None


def load_curve(path: str | Path) -> PriceUsageCurve:
    """Load a single demand-curve JSON file."""
    r = _Reader()
    doc = _read_json(Path(path), r)
    curve = _parse_curve(doc, str(path), r) if doc is not None else None
    r.raise_if_failed()
    assert curve is not None
    return curve


def _parse_service(doc: dict, idx: int, base_dir: Path, r: _Reader) -> ServiceSpec | None:
    path = f"company.services[{idx}]"
    sid = r.get(doc, path, "id", str)
    name = r.get(doc, path, "name", str, default=sid or "")
    marginal = r.money(doc, path, "marginal_cost_cents", minimum=0, default=Money(0))
    fixed = r.money(doc, path, "fixed_cost_cents_per_month", minimum=0, default=Money(0))

    curve = None
    if "curve" in doc:
        curve = _parse_curve(doc["curve"], f"{path}.curve", r)
    elif "curve_file" in doc:
        ref = r.get(doc, path, "curve_file", str)
        if ref is not None:
            curve_path = base_dir / ref
            cdoc = _read_json(curve_path, r)
            if cdoc is not None:
                curve = _parse_curve(cdoc, f"{path}.curve_file({ref})", r)
    else:
        r.fail(path, "one of 'curve' or 'curve_file' is required")

    if sid is None or curve is None:
        return None
    try:
        return ServiceSpec(id=sid, name=name, curve=curve, marginal_cost=marginal, fixed_cost=fixed)
    except ValidationError as exc:
        for msg in exc.errors:
            r.fail(path, msg)
        return None


def _parse_schedule(value, months: int, path: str, r: _Reader, kind, minimum=None) -> tuple | None:
    """A constant or an explicit per-month list, expanded to length ``months``."""
    if isinstance(value, list):
        if len(value) != months:
            r.fail(path, f"schedule length {len(value)} does not match months {months}")
            return None
        out = []
        for i, v in enumerate(value):
            if kind is int and (not isinstance(v, int) or isinstance(v, bool)):
                r.fail(f"{path}[{i}]", f"expected an integer, got {v!r}")
                return None
            if kind is bool and not isinstance(v, bool):
                r.fail(f"{path}[{i}]", f"expected a boolean, got {v!r}")
                return None
            if minimum is not None and v < minimum:
                r.fail(f"{path}[{i}]", f"must be >= {minimum}, got {v}")
                return None
            out.append(v)
        return tuple(out)
    if kind is int and isinstance(value, int) and not isinstance(value, bool):
        if minimum is not None and value < minimum:
            r.fail(path, f"must be >= {minimum}, got {value}")
            return None
        return (value,) * months
    if kind is bool and isinstance(value, bool):
        return (value,) * months
    r.fail(path, f"expected {kind.__name__} or per-month list, got {value!r}")
    return None


def load_scenario(path: str | Path) -> ScenarioFile:
    """Load and fully validate a scenario file.

    Raises ValidationError carrying every problem found, not just the first.
    """
    path = Path(path)
    r = _Reader()
    doc = _read_json(path, r)
    r.raise_if_failed()
    base_dir = path.parent

    name = r.get(doc, "", "name", str, default=path.stem)

    company = doc.get("company")
    if not isinstance(company, dict):
        r.fail("company", "missing required block")
        r.raise_if_failed()
    purchase = r.money(company, "company", "purchase_price_cents", minimum=0)
    pre_ipo = r.money(company, "company", "pre_ipo_value_cents", minimum=1)
    esop = r.get(company, "company", "esop_fraction", float, default=0.0)
    if esop is not None and not 0.0 <= esop < 1.0:
        r.fail("company.esop_fraction", f"must be in [0, 1), got {esop}")
    proposer = r.get(company, "company", "proposer_id", str, default="proposer")

    raw_services = company.get("services")
    services: list[ServiceSpec] = []
    if not isinstance(raw_services, list) or not raw_services:
        r.fail("company.services", "expected a non-empty array of services")
    else:
        for i, sdoc in enumerate(raw_services):
            if not isinstance(sdoc, dict):
                r.fail(f"company.services[{i}]", "expected an object")
                continue
            svc = _parse_service(sdoc, i, base_dir, r)
            if svc is not None:
                services.append(svc)

    costs_doc = company.get("costs", {})
    if not isinstance(costs_doc, dict):
        r.fail("company.costs", "expected an object")
        costs_doc = {}
    hours = r.get(costs_doc, "company.costs", "maintenance_hours_per_month", float, default=0.0)
    rate = r.money(costs_doc, "company.costs", "maintenance_hourly_rate_cents", default=Money(0))
    admin = r.money(costs_doc, "company.costs", "admin_fixed_cents_per_month", default=Money(0))
    incentive = r.get(costs_doc, "company.costs", "incentive_rate", float, default=0.05)
    costs = None
    try:
        costs = CostStructure(
            maintenance_hours_per_month=hours if hours is not None else 0.0,
            maintenance_hourly_rate=rate,
            admin_fixed=admin,
            incentive_rate=incentive if incentive is not None else 0.05,
        )
    except ValidationError as exc:
        for msg in exc.errors:
            r.fail("company", msg)

    ipo_doc = doc.get("ipo")
    if not isinstance(ipo_doc, dict):
        r.fail("ipo", "missing required block")
        r.raise_if_failed()
    goal = r.money(ipo_doc, "ipo", "funding_goal_cents", minimum=1)
    share_price = r.money(ipo_doc, "ipo", "share_price_cents", minimum=1, default=Money(100))
    window = r.get(ipo_doc, "ipo", "window_months", int, default=3)
    if goal.cents > 0 and share_price.cents > 0 and goal.cents % share_price.cents != 0:
        r.fail("ipo.funding_goal_cents", f"{goal} is not a whole number of shares at {share_price}")
    if purchase.cents > goal.cents:
        r.fail(
            "ipo.funding_goal_cents",
            f"goal {goal} does not cover company.purchase_price_cents {purchase}",
        )

    pledges: list[PledgeEntry] = []
    raw_pledges = ipo_doc.get("pledges", [])
    if not isinstance(raw_pledges, list):
        r.fail("ipo.pledges", "expected an array")
        raw_pledges = []
    for i, pdoc in enumerate(raw_pledges):
        ppath = f"ipo.pledges[{i}]"
        if not isinstance(pdoc, dict):
            r.fail(ppath, "expected an object")
            continue
        month = r.get(pdoc, ppath, "month", int, default=0)
        investor = r.get(pdoc, ppath, "investor", str)
        amount = r.money(pdoc, ppath, "amount_cents", minimum=1)
        if window is not None and month is not None and not 0 <= month < window:
            r.fail(f"{ppath}.month", f"must fall inside the funding window [0, {window})")
        if share_price.cents > 0 and amount.cents % share_price.cents != 0:
            r.fail(f"{ppath}.amount_cents", f"{amount} is not a whole number of shares at {share_price}")
        if investor is not None:
            pledges.append(PledgeEntry(month=month or 0, investor=investor, amount=amount))

    sim_doc = doc.get("simulation")
    if not isinstance(sim_doc, dict):
        r.fail("simulation", "missing required block")
        r.raise_if_failed()
    months = r.get(sim_doc, "simulation", "months", int, default=12)
    if months is None:
        months = 12  # type error already recorded; keep collecting
    elif months < 1:
        r.fail("simulation.months", f"must be >= 1, got {months}")
        months = 1
    users = _parse_schedule(
        sim_doc.get("users", 0), months, "simulation.users", r, int, minimum=0
    )
    uptime_raw = sim_doc.get("uptime", True)
    if isinstance(uptime_raw, dict):
        mode = r.get(uptime_raw, "simulation.uptime", "mode", str)
        p = r.get(uptime_raw, "simulation.uptime", "p", float, default=1.0)
        useed = r.get(uptime_raw, "simulation.uptime", "seed", int, default=0)
        if mode != "bernoulli":
            r.fail("simulation.uptime.mode", f"unknown mode {mode!r}")
            uptime = (True,) * months
        elif not 0.0 <= p <= 1.0:
            r.fail("simulation.uptime.p", f"must be in [0, 1], got {p}")
            uptime = (True,) * months
        else:
            rng = random.Random(useed)
            uptime = tuple(rng.random() < p for _ in range(months))
    else:
        uptime = _parse_schedule(uptime_raw, months, "simulation.uptime", r, bool)
    reserve_rate = r.get(sim_doc, "simulation", "reserve_rate", float, default=0.10)
    if reserve_rate is not None and not 0.0 <= reserve_rate <= 1.0:
        r.fail("simulation.reserve_rate", f"must be in [0, 1], got {reserve_rate}")
    steady = r.get(sim_doc, "simulation", "steady_months", int, default=3)
    if steady is not None and steady < 1:
        r.fail("simulation.steady_months", f"must be >= 1, got {steady}")
    seed = r.get(sim_doc, "simulation", "seed", int, default=0)

    val_doc = doc.get("valuation", {})
    if not isinstance(val_doc, dict):
        r.fail("valuation", "expected an object")
        val_doc = {}
    target_apr = r.get(val_doc, "valuation", "target_apr", float, default=0.041)
    pe_ratio = val_doc.get("pe_ratio")
    if pe_ratio is not None and not isinstance(pe_ratio, (int, float)):
        r.fail("valuation.pe_ratio", f"expected a number, got {pe_ratio!r}")
        pe_ratio = None
    z = r.get(val_doc, "valuation", "months_to_steady", int, default=12)
    valuation = None
    try:
        valuation = ValuationParams(
            target_apr=target_apr if target_apr is not None else 0.041,
            pe_ratio=float(pe_ratio) if pe_ratio is not None else None,
            months_to_steady=z if z is not None else 12,
        )
    except ValidationError as exc:
        for msg in exc.errors:
            r.fail("valuation", msg)

    reference = None
    ref_doc = val_doc.get("reference_table")
    if ref_doc is not None:
        if not isinstance(ref_doc, dict):
            r.fail("valuation.reference_table", "expected an object")
        else:
            rpath = "valuation.reference_table"
            mv_raw = ref_doc.get("market_value_cents")
            mv = None
            if mv_raw is not None:
                if not isinstance(mv_raw, int) or isinstance(mv_raw, bool):
                    r.fail(f"{rpath}.market_value_cents", f"money must be integer cents, got {mv_raw!r}")
                else:
                    mv = Money(mv_raw)
            reference = ReferenceTable(
                ipo_assets=r.money(ref_doc, rpath, "ipo_assets_cents", minimum=0, default=Money(0)),
                ipo_working_capital=r.money(
                    ref_doc, rpath, "ipo_working_capital_cents", minimum=0, default=Money(0)
                ),
                income_per_year=r.money(ref_doc, rpath, "income_yr_cents", minimum=0),
                market_value=mv,
                users=r.get(ref_doc, rpath, "users", int, default=0),
                admin_pay=r.get(ref_doc, rpath, "admin_pay", str, default=""),
            )

    r.raise_if_failed()
    return ScenarioFile(
        name=name,
        purchase_price=purchase,
        pre_ipo_value=pre_ipo,
        esop_fraction=esop,
        proposer_id=proposer,
        services=tuple(services),
        costs=costs,
        funding_goal=goal,
        share_price=share_price,
        window_months=window,
        pledges=tuple(pledges),
        months=months,
        users=users,
        uptime=uptime,
        reserve_rate=reserve_rate,
        steady_months=steady,
        seed=seed,
        valuation=valuation,
        reference_table=reference,
    )


def load_instance(path: str | Path) -> tuple[list[CompanySite], int, Money]:
    """Load a virtualization instance: companies, entity count N, threshold T."""
    path = Path(path)
    r = _Reader()
    doc = _read_json(path, r)
    r.raise_if_failed()

    n = r.get(doc, "", "N", int)
    if n is not None and n < 1:
        r.fail("N", f"must be >= 1, got {n}")
    threshold = r.money(doc, "", "T_cents", minimum=1)

    companies: list[CompanySite] = []
    raw = doc.get("companies")
    if not isinstance(raw, list) or not raw:
        r.fail("companies", "expected a non-empty array")
        raw = []
    seen: set[str] = set()
    for i, cdoc in enumerate(raw):
        cpath = f"companies[{i}]"
        if not isinstance(cdoc, dict):
            r.fail(cpath, "expected an object")
            continue
        cid = r.get(cdoc, cpath, "id", str)
        valuation = r.money(cdoc, cpath, "valuation_cents", minimum=1)
        x = r.get(cdoc, cpath, "x_m", float)
        y = r.get(cdoc, cpath, "y_m", float)
        if cid is None or x is None or y is None:
            continue
        if cid in seen:
            r.fail(f"{cpath}.id", f"duplicate company id {cid!r}")
            continue
        seen.add(cid)
        try:
            companies.append(CompanySite(company_id=cid, valuation=valuation, x=x, y=y))
        except ValidationError as exc:
            for msg in exc.errors:
                r.fail(cpath, msg)

    r.raise_if_failed()
    return companies, n, threshold
