"""Matplotlib figures rendered next to the delimited report output.

The CSV/JSON files remain the canonical artifacts; these figures are the
human-readable view (cost vs revenue sweep, monthly cash/profit timeline,
virtual-entity map).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .simulate import SimulationReport, SweepResult
from .virtualize import CompanySite, VirtualAssignment


def plot_sweep(result: SweepResult, out_dir: str | Path, title: str = "") -> Path:
    """Annual cost and revenue against user count, with the break-even marker."""
    users = [r.users for r in result.rows]
    revenue = [r.annual_revenue.dollars for r in result.rows]
    cost = [r.annual_cost.dollars for r in result.rows]

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(users, revenue, label="annual revenue", color="tab:green")
    ax.plot(users, cost, label="annual cost", color="tab:red")
    if result.break_even_users is not None:
        ax.axvline(result.break_even_users, color="gray", linestyle="--", linewidth=1)
        ax.annotate(
            f"break-even: {result.break_even_users}",
            xy=(result.break_even_users, max(cost) if cost else 0),
            fontsize=9,
            ha="left",
        )
    ax.set_xlabel("potential users")
    ax.set_ylabel("dollars / year")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    path = Path(out_dir) / "sweep.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_timeline(report: SimulationReport, out_dir: str | Path) -> Path:
    """Monthly profit bars and the cash balance line for one scenario run."""
    months = [s.month for s in report.statements]
    profit = [s.profit.dollars for s in report.statements]
    cash = [s.closing_cash.dollars for s in report.statements]

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(months, profit, color=["tab:green" if p >= 0 else "tab:red" for p in profit], label="profit")
    ax.plot(months, cash, color="tab:blue", marker="o", markersize=3, label="closing cash")
    ax.axhline(0, color="black", linewidth=0.8)
    ax.set_xlabel("month")
    ax.set_ylabel("dollars")
    ax.set_title(report.scenario_name)
    ax.legend()
    fig.tight_layout()
    path = Path(out_dir) / "timeline.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_assignment(
    companies: list[CompanySite], assignment: VirtualAssignment, out_dir: str | Path
) -> Path:
    """Company map colored by virtual entity."""
    fig, ax = plt.subplots(figsize=(5, 5))
    cmap = plt.get_cmap("tab10")
    for c in companies:
        j = assignment.assignment[c.company_id]
        ax.scatter(c.x, c.y, color=cmap(j % 10), s=60)
        ax.annotate(c.company_id, (c.x, c.y), fontsize=7, xytext=(3, 3), textcoords="offset points")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_title(f"virtual entities (objective {assignment.objective:.1f})")
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    path = Path(out_dir) / "entities.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
