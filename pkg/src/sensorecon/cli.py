"""Command-line interface.

Subcommands: simulate, sweep, virtualize, valuate, price, ipo-settle.
Exit codes: 0 success, 2 validation error, 3 runtime error. stdout carries
only data; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .errors import DomainError, InfeasibleError, SensorEconError, ValidationError
from .ipo import RoundState
from .money import Money
from .pricing import ServiceSpec, optimize_price
from .scenario import load_curve, load_instance, load_scenario
from .simulate import break_even_sweep, run_ipo, run_scenario
from .valuation import (
    appreciation_over_preipo,
    market_valuation,
    pe_from_apr,
    preipo_apr,
    proposer_reward,
)
from .virtualize import EXHAUSTIVE_LIMIT, brute_force_portfolio, optimize_portfolio
from . import report as report_io

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def _apply_overrides(scenario, args):
    if getattr(args, "users", None) is not None:
        if args.users < 0:
            raise ValidationError("--users: must be >= 0")
        scenario = replace(scenario, users=(args.users,) * scenario.months)
    if getattr(args, "months", None) is not None:
        if args.months < 1:
            raise ValidationError("--months: must be >= 1")
        m = args.months
        users = (scenario.users + (scenario.users[-1],) * m)[:m]
        uptime = (scenario.uptime + (True,) * m)[:m]
        scenario = replace(scenario, months=m, users=users, uptime=uptime)
    if getattr(args, "seed", None) is not None:
        scenario = replace(scenario, seed=args.seed)
    if getattr(args, "pe", None) is not None:
        scenario = replace(scenario, valuation=replace(scenario.valuation, pe_ratio=args.pe))
    elif getattr(args, "apr", None) is not None:
        scenario = replace(
            scenario, valuation=replace(scenario.valuation, target_apr=args.apr, pe_ratio=None)
        )
    return scenario


def cmd_simulate(args) -> int:
    scenario = _apply_overrides(load_scenario(args.scenario), args)
    report = run_scenario(scenario)
    paths = report_io.emit_simulation_report(report, args.out, scenario=scenario)
    if not args.no_plots:
        from . import plots

        paths.append(plots.plot_timeline(report, args.out))
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_sweep(args) -> int:
    scenario = _apply_overrides(load_scenario(args.scenario), args)
    if args.max < args.min:
        raise ValidationError("--max: must be >= --min")
    result = break_even_sweep(scenario, range(args.min, args.max + 1))
    path = report_io.emit_sweep(result, args.out)
    if not args.no_plots:
        from . import plots

        plots.plot_sweep(result, args.out, title=scenario.name)
    if result.break_even_users is None:
        print("break-even: not reached")
    else:
        print(f"break-even: {result.break_even_users}")
    print(path)
    return EXIT_OK


def cmd_virtualize(args) -> int:
    companies, n, threshold = load_instance(args.instance)
    result = optimize_portfolio(companies, n, threshold, seed=args.seed, method=args.method)
    if n ** len(companies) <= EXHAUSTIVE_LIMIT:
        oracle = brute_force_portfolio(companies, n, threshold)
        gap = abs(oracle.objective - result.objective)
        result = replace(result, optimality_gap=gap)
    path = report_io.emit_assignment(result, threshold.cents, args.out)
    if not args.no_plots:
        from . import plots

        plots.plot_assignment(companies, result, args.out)
    print(f"objective: {result.objective:.6g}")
    if result.optimality_gap is not None:
        print(f"gap: {result.optimality_gap:.6g}")
    print(path)
    return EXIT_OK


def cmd_valuate(args) -> int:
    pe = None
    if args.pe is not None:
        pe = args.pe
    elif args.apr is not None:
        pe = pe_from_apr(args.apr)
        print(f"P/E {pe:.2f}")
    if args.income is not None:
        if pe is None:
            raise ValidationError("--income requires --pe or --apr")
        income = Money.from_dollars(args.income)
        value = market_valuation(income, pe)
        print(f"Market value {value}")
        if args.pre_ipo_value is not None:
            pre_ipo = Money.from_dollars(args.pre_ipo_value)
            apr = preipo_apr(pe, income, pre_ipo, args.months_to_steady)
            print(f"Pre-IPO APR {100.0 * apr:.2f}%")
            print(f"Return over pre-IPO {appreciation_over_preipo(value, pre_ipo):.1f}%")
        if args.esop is not None:
            print(f"Proposer reward {proposer_reward(value, args.esop)}")
    elif args.pe is not None:
        print(f"P/E {args.pe:.2f}")
    return EXIT_OK


def cmd_price(args) -> int:
    curve = load_curve(args.curve)
    service = ServiceSpec(
        id=Path(args.curve).stem,
        name=Path(args.curve).stem,
        curve=curve,
        marginal_cost=Money(args.marginal_cost_cents),
    )
    price, value = optimize_price(service, args.users, args.objective)
    print(f"price {price}")
    print(f"expected monthly {args.objective} {value}")
    return EXIT_OK


def cmd_ipo_settle(args) -> int:
    scenario = load_scenario(args.scenario)
    settlement, total = run_ipo(scenario)
    if settlement.state is RoundState.FUNDED:
        print(f"funded: cash {settlement.cash} of {total} pledged")
        for investor, shares in settlement.cap_table.entries.items():
            print(f"  {investor}: {shares} shares")
    else:
        print(f"terminated: {total} pledged against goal {scenario.funding_goal}, all refunded")
    refunded = sum(m.cents for m in settlement.refunds.values())
    if refunded:
        print(f"refunded {Money(refunded)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sensorecon",
        description="Simulate sensor micro-company economics: pricing, IPOs, dividends, virtualization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario and emit reports")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--users", type=int)
    p.add_argument("--months", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--pe", type=float)
    p.add_argument("--apr", type=float)
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="break-even sweep over a user-count range")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min", type=int, default=0)
    p.add_argument("--max", type=int, default=100)
    p.add_argument("--pe", type=float)
    p.add_argument("--apr", type=float)
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("virtualize", help="assign companies to virtual entities")
    p.add_argument("--instance", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=["auto", "exhaustive", "relaxation"], default="auto")
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_virtualize)

    p = sub.add_parser("valuate", help="P/E, market value, and investor-return arithmetic")
    p.add_argument("--apr", type=float)
    p.add_argument("--pe", type=float)
    p.add_argument("--income", type=float, help="annual earnings in dollars")
    p.add_argument("--pre-ipo-value", type=float, help="pre-IPO value in dollars")
    p.add_argument("--months-to-steady", type=int, default=12)
    p.add_argument("--esop", type=float)
    p.set_defaults(func=cmd_valuate)

    p = sub.add_parser("price", help="revenue-maximizing price for one demand curve")
    p.add_argument("--curve", required=True)
    p.add_argument("--users", type=int, default=1)
    p.add_argument("--objective", choices=["revenue", "profit"], default="revenue")
    p.add_argument("--marginal-cost-cents", type=int, default=0)
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("ipo-settle", help="settle a scenario's pledge schedule")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_ipo_settle)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, InfeasibleError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SensorEconError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
