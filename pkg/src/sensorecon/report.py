"""Report emission: metrics JSON, statement/sweep CSV, assignment JSON.

Output is byte-stable: keys are sorted, money is integer cents, and no
timestamps or environment details leak into the files, so identical inputs
produce identical bytes.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .scenario import ScenarioFile
from .simulate import SimulationReport, SweepResult
from .virtualize import VirtualAssignment

SWEEP_HEADER = ["users", "annual_revenue_cents", "annual_cost_cents", "profit_cents"]

STATEMENT_HEADER = [
    "month",
    "revenue_cents",
    "marginal_costs_cents",
    "fixed_costs_cents",
    "maintenance_pay_cents",
    "incentive_pay_cents",
    "depreciation_cents",
    "profit_cents",
    "dividend_paid_cents",
    "reserve_delta_cents",
    "closing_cash_cents",
]


def _write_json(path: Path, payload) -> None:
    with open(path, "w", newline="") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _ensure_out_dir(out_dir: str | Path) -> Path:
    # An unwritable directory surfaces as OSError: a runtime problem, not a
    # validation one, so the CLI maps it to exit code 3.
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def metrics_payload(report: SimulationReport) -> dict:
    payload = {
        "scenario": report.scenario_name,
        "ipo": {
            "outcome": report.ipo_outcome,
            "total_pledged_cents": report.total_pledged.cents,
            "cash_retained_cents": report.ipo_cash.cents,
            "refunds_cents": {k: v.cents for k, v in report.refunds.items()},
        },
        "final": {
            "state": report.final_state,
            "cash_cents": report.final_cash.cents,
            "reserve_cents": report.final_reserve.cents,
            "cap_table": report.cap_table,
            "esop_granted": report.esop_granted,
            "valuation_method": report.valuation_method,
            "valuation_cents": report.valuation_value.cents,
        },
        "pricing": {
            "prices_cents": {k: v.cents for k, v in report.prices.items()},
            "annual_revenue_per_user_cents": report.revenue_per_user_year.cents,
        },
        "cumulative_profit_cents": report.cumulative_profit.cents,
        "dividends_paid_cents": sum(s.dividend_paid.cents for s in report.statements),
        "table": report.metrics["table"],
        "notes": report.metrics["notes"],
    }
    if report.liquidation is not None:
        payload["liquidation_cents"] = {k: v.cents for k, v in report.liquidation.items()}
    return payload


def emit_simulation_report(
    report: SimulationReport, out_dir: str | Path, scenario: ScenarioFile | None = None
) -> list[Path]:
    """Write metrics.json, statements.csv, and (when given) a scenario echo."""
    out = _ensure_out_dir(out_dir)
    paths = []

    metrics_path = out / "metrics.json"
    _write_json(metrics_path, metrics_payload(report))
    paths.append(metrics_path)

    statements_path = out / "statements.csv"
    with open(statements_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(STATEMENT_HEADER)
        for s in report.statements:
            writer.writerow(
                [
                    s.month,
                    s.total_revenue.cents,
                    s.marginal_costs.cents,
                    s.fixed_costs.cents,
                    s.maintenance_pay.cents,
                    s.incentive_pay.cents,
                    s.depreciation.cents,
                    s.profit.cents,
                    s.dividend_paid.cents,
                    s.reserve_delta.cents,
                    s.closing_cash.cents,
                ]
            )
    paths.append(statements_path)

    if scenario is not None:
        echo_path = out / "scenario_echo.json"
        _write_json(echo_path, scenario.to_dict())
        paths.append(echo_path)
    return paths


def emit_sweep(result: SweepResult, out_dir: str | Path) -> Path:
    """Write sweep.csv: one row per simulated user count."""
    out = _ensure_out_dir(out_dir)
    path = out / "sweep.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_HEADER)
        for row in result.rows:
            writer.writerow(
                [row.users, row.annual_revenue.cents, row.annual_cost.cents, row.profit.cents]
            )
    return path


def emit_assignment(
    assignment: VirtualAssignment, threshold_cents: int, out_dir: str | Path
) -> Path:
    out = _ensure_out_dir(out_dir)
    path = out / "assignment.json"
    payload = {
        "assignment": assignment.assignment,
        "entity_scores": assignment.entity_scores,
        "objective": assignment.objective,
        "method": assignment.method,
        "n_entities": assignment.n_entities,
        "threshold_cents": threshold_cents,
    }
    if assignment.optimality_gap is not None:
        payload["optimality_gap"] = assignment.optimality_gap
    _write_json(path, payload)
    return path
