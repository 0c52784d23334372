"""Aggregating sensor companies into virtual entities.

Placement is a capacity-constrained assignment: N virtual entities, each
with a valuation ceiling T, chosen to maximize the summed compatibility of
co-assigned companies (negative mean pairwise distance, so tighter
clusters score higher). Small instances are solved exactly by enumeration;
larger ones by a continuous relaxation (projected gradient on the
quadratic co-assignment objective) followed by greedy rounding, repair,
and deterministic local search.

Compatibility defaults to physical proximity but is pluggable: both
solvers accept a pairwise-distance matrix (indexed like the company list)
in place of Euclidean distances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, ValidationError
from .money import Money

#: Largest labeled search space the exhaustive solver accepts (N ** M).
EXHAUSTIVE_LIMIT = 10**6


@dataclass(frozen=True)
class CompanySite:
    """A sensor company's valuation and physical location (meters)."""

    company_id: str
    valuation: Money
    x: float
    y: float

    def __post_init__(self):
        if self.valuation.cents <= 0:
            raise ValidationError(f"company.{self.company_id}.valuation: must be > 0")


@dataclass(frozen=True)
class VirtualAssignment:
    """A feasible placement of every company into one of N entities."""

    assignment: dict[str, int]
    entity_scores: list[float]
    objective: float
    method: str
    n_entities: int
    optimality_gap: float | None = None

    def members(self) -> list[list[str]]:
        groups: list[list[str]] = [[] for _ in range(self.n_entities)]
        for cid, j in self.assignment.items():
            groups[j].append(cid)
        return groups


def _distance(a: CompanySite, b: CompanySite) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def compatibility_score(members: list[CompanySite]) -> float:
    """Negative mean pairwise distance; singletons score 0 (nothing to be far from)."""
    if not members:
        raise ValidationError("compatibility_score: member set must be non-empty")
    k = len(members)
    if k == 1:
        return 0.0
    total = 0.0
    for i in range(k):
        for j in range(i + 1, k):
            total += _distance(members[i], members[j])
    return -total / (k * (k - 1) // 2)


def _check_each_fits(companies: list[CompanySite], threshold: Money) -> None:
    for c in companies:
        if c.valuation.cents > threshold.cents:
            raise InfeasibleError(
                f"company {c.company_id} (valuation {c.valuation}) exceeds the "
                f"per-entity threshold {threshold}; it fits no entity",
                company_id=c.company_id,
            )


def _pair_matrix(
    companies: list[CompanySite], pair_distances: list[list[float]] | None
) -> list[list[float]]:
    m = len(companies)
    if pair_distances is None:
        d = [[0.0] * m for _ in range(m)]
        for i in range(m):
            for j in range(i + 1, m):
                d[i][j] = d[j][i] = _distance(companies[i], companies[j])
        return d
    if len(pair_distances) != m or any(len(row) != m for row in pair_distances):
        raise ValidationError(f"pair_distances: must be a {m}x{m} matrix")
    for i in range(m):
        for j in range(m):
            if abs(pair_distances[i][j] - pair_distances[j][i]) > 1e-9:
                raise ValidationError(f"pair_distances: must be symmetric (entry {i},{j})")
    return [list(row) for row in pair_distances]


def _scores_of_labels(labels: list[int], n: int, d: list[list[float]]) -> list[float]:
    groups: list[list[int]] = [[] for _ in range(n)]
    for i, j in enumerate(labels):
        groups[j].append(i)
    scores = []
    for members in groups:
        k = len(members)
        if k < 2:
            scores.append(0.0)
            continue
        total = 0.0
        for a in range(k):
            row = d[members[a]]
            for b in range(a + 1, k):
                total += row[members[b]]
        scores.append(-total / (k * (k - 1) // 2))
    return scores


def _objective_of_labels(labels: list[int], n: int, d: list[list[float]]) -> float:
    return sum(_scores_of_labels(labels, n, d))


def _assignment_from_labels(
    companies: list[CompanySite], labels: list[int], n: int, method: str, d: list[list[float]]
) -> VirtualAssignment:
    scores = _scores_of_labels(labels, n, d)
    return VirtualAssignment(
        assignment={c.company_id: j for c, j in zip(companies, labels)},
        entity_scores=scores,
        objective=sum(scores),
        method=method,
        n_entities=n,
    )


def validate_assignment(
    companies: list[CompanySite], assignment: VirtualAssignment, n: int, threshold: Money
) -> None:
    """Post-hoc feasibility assertion: every company placed once, loads within T."""
    if set(assignment.assignment) != {c.company_id for c in companies}:
        raise ValidationError("assignment: every company must be assigned exactly once")
    loads = [0] * n
    for c in companies:
        j = assignment.assignment[c.company_id]
        if not 0 <= j < n:
            raise ValidationError(f"assignment.{c.company_id}: entity index {j} out of range")
        loads[j] += c.valuation.cents
    for j, load in enumerate(loads):
        if load > threshold.cents:
            raise ValidationError(
                f"assignment: entity {j} load {Money(load)} exceeds threshold {threshold}"
            )


def brute_force_portfolio(
    companies: list[CompanySite],
    n: int,
    threshold: Money,
    pair_distances: list[list[float]] | None = None,
) -> VirtualAssignment:
    """Exact optimum by exhaustive enumeration, for verification.

    Enumerates set partitions into at most n blocks in canonical label order
    (entity labels appear in order of first use), which visits each distinct
    grouping once at its lexicographically smallest label vector; ties keep
    the first optimum found, so tie-breaking is lexicographic.
    """
    if n < 1:
        raise ValidationError(f"n: must be >= 1, got {n}")
    if not companies:
        raise ValidationError("companies: must be non-empty")
    m = len(companies)
    if n**m > EXHAUSTIVE_LIMIT:
        raise ValidationError(
            f"instance too large for enumeration ({n}^{m} > {EXHAUSTIVE_LIMIT}); "
            "use optimize_portfolio"
        )
    _check_each_fits(companies, threshold)

    d = _pair_matrix(companies, pair_distances)
    values = [c.valuation.cents for c in companies]
    cap = threshold.cents

    labels = [0] * m
    loads = [0] * n
    sizes = [0] * n
    pair_sums = [0.0] * n
    members: list[list[int]] = [[] for _ in range(n)]
    best: dict = {"objective": None, "labels": None}

    def leaf_objective() -> float:
        total = 0.0
        for j in range(n):
            k = sizes[j]
            if k >= 2:
                total -= pair_sums[j] / (k * (k - 1) // 2)
        return total

    def dfs(i: int, used: int) -> None:
        if i == m:
            obj = leaf_objective()
            if best["objective"] is None or obj > best["objective"]:
                best["objective"] = obj
                best["labels"] = labels.copy()
            return
        vi = values[i]
        di = d[i]
        for j in range(min(used + 1, n)):
            if loads[j] + vi > cap:
                continue
            added = 0.0
            for k in members[j]:
                added += di[k]
            labels[i] = j
            loads[j] += vi
            sizes[j] += 1
            pair_sums[j] += added
            members[j].append(i)
            dfs(i + 1, max(used, j + 1))
            members[j].pop()
            pair_sums[j] -= added
            sizes[j] -= 1
            loads[j] -= vi
        labels[i] = 0

    dfs(0, 0)
    if best["labels"] is None:
        raise InfeasibleError(
            f"no feasible assignment: companies cannot be packed into {n} entities "
            f"under threshold {threshold}"
        )
    result = _assignment_from_labels(companies, best["labels"], n, "exhaustive", d)
    validate_assignment(companies, result, n, threshold)
    return result


def _project_rows_to_simplex(x: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row onto the probability simplex."""
    m, n = x.shape
    sorted_x = np.sort(x, axis=1)[:, ::-1]
    cssv = np.cumsum(sorted_x, axis=1) - 1.0
    ind = np.arange(1, n + 1)
    cond = sorted_x - cssv / ind > 0
    rho = cond.sum(axis=1)
    theta = cssv[np.arange(m), rho - 1] / rho
    return np.maximum(x - theta[:, None], 0.0)


def _relax_and_round(
    values: list[int],
    d: list[list[float]],
    n: int,
    cap: int,
    seed: int,
    iterations: int = 300,
) -> list[int]:
    m = len(values)
    dm = np.array(d)

    rng = np.random.RandomState(seed)
    x = np.full((m, n), 1.0 / n) + rng.uniform(-0.01, 0.01, size=(m, n))
    x = _project_rows_to_simplex(x)

    # Gradient step on the co-assignment distance mass sum_j x_j^T D x_j.
    scale = dm.sum(axis=1).max()
    step = 0.5 / scale if scale > 0 else 0.1
    for _ in range(iterations):
        x = _project_rows_to_simplex(x - step * (2.0 * dm @ x))

    # Greedy rounding: strongest convictions first, capacity respected.
    order = sorted(range(m), key=lambda i: (-float(x[i].max()), i))
    labels = [-1] * m
    loads = [0] * n
    for i in order:
        prefs = sorted(range(n), key=lambda j: (-float(x[i, j]), j))
        placed = False
        for j in prefs:
            if loads[j] + values[i] <= cap:
                labels[i] = j
                loads[j] += values[i]
                placed = True
                break
        if not placed:
            j = prefs[0]
            labels[i] = j
            loads[j] += values[i]

    # Repair: move the smallest-valuation member out of any overfull entity.
    for _ in range(m * n + 1):
        over = [j for j in range(n) if loads[j] > cap]
        if not over:
            break
        j = over[0]
        movers = sorted((i for i in range(m) if labels[i] == j), key=lambda i: (values[i], i))
        moved = False
        for i in movers:
            targets = sorted(range(n), key=lambda t: (-(cap - loads[t]), t))
            for t in targets:
                if t != j and loads[t] + values[i] <= cap:
                    labels[i] = t
                    loads[j] -= values[i]
                    loads[t] += values[i]
                    moved = True
                    break
            if moved:
                break
        if not moved:
            raise InfeasibleError(
                f"no feasible assignment: repair cannot fit companies into {n} "
                f"entities under threshold {Money(cap)}"
            )
    else:
        raise InfeasibleError("repair loop did not converge; instance is too tight")

    return labels


def _concentration_labels(values: list[int], d: list[list[float]], n: int, cap: int) -> list[int] | None:
    """Alternative rounding seed: pack central companies into as few entities as possible.

    The mean-based score often peaks at one large entity plus remote
    singletons; this start point makes that shape reachable. Returns None if
    the packing fails (capacity too tight for this ordering).
    """
    m = len(values)
    order = sorted(range(m), key=lambda i: (sum(d[i]), i))
    labels = [-1] * m
    loads = [0] * n
    for i in order:
        for j in range(n):
            if loads[j] + values[i] <= cap:
                labels[i] = j
                loads[j] += values[i]
                break
        else:
            return None
    return labels


def _heavy_exclusion_labels(
    values: list[int], d: list[list[float]], n: int, cap: int, k: int
) -> list[int] | None:
    """Candidate that parks the k heaviest companies in the tail entities.

    Capacity-bound optima often keep one large central entity and spill only
    the heaviest valuations; this start point makes those shapes reachable.
    """
    if n < 2:
        return None
    m = len(values)
    by_weight = sorted(range(m), key=lambda i: (-values[i], i))
    heavy = set(by_weight[:k])
    rest_order = [i for i in sorted(range(m), key=lambda i: (sum(d[i]), i)) if i not in heavy]

    labels = [-1] * m
    loads = [0] * n
    for i in rest_order:
        for j in range(n):
            if loads[j] + values[i] <= cap:
                labels[i] = j
                loads[j] += values[i]
                break
        else:
            return None
    for i in by_weight[:k]:
        for j in range(n - 1, -1, -1):
            if loads[j] + values[i] <= cap:
                labels[i] = j
                loads[j] += values[i]
                break
        else:
            return None
    return labels


def _local_improve(values: list[int], d: list[list[float]], labels: list[int], n: int, cap: int) -> list[int]:
    """Deterministic hill climbing on the true objective.

    Move set: relocate one company, merge one entity into another, and joint
    relocation of any two companies (which subsumes swaps). Merges and joint
    moves matter because the mean-based score often prefers one large entity
    plus singletons, and capacity can make every single move infeasible even
    when a coordinated exchange improves.
    """
    m = len(values)
    loads = [0] * n
    for i, j in enumerate(labels):
        loads[j] += values[i]

    def objective() -> float:
        return _objective_of_labels(labels, n, d)

    def feasible() -> bool:
        check = [0] * n
        for i, j in enumerate(labels):
            check[j] += values[i]
        return all(l <= cap for l in check)

    current = objective()
    improved = True
    while improved:
        improved = False
        # relocate one company
        for i in range(m):
            src = labels[i]
            for j in range(n):
                if j == src or loads[j] + values[i] > cap:
                    continue
                labels[i] = j
                candidate = objective()
                if candidate > current + 1e-12:
                    loads[src] -= values[i]
                    loads[j] += values[i]
                    current = candidate
                    src = j
                    improved = True
                else:
                    labels[i] = src
        # merge entity b into entity a
        for a in range(n):
            for b in range(n):
                if a == b or loads[b] == 0 or loads[a] + loads[b] > cap:
                    continue
                moved = [i for i in range(m) if labels[i] == b]
                for i in moved:
                    labels[i] = a
                candidate = objective()
                if candidate > current + 1e-12:
                    loads[a] += loads[b]
                    loads[b] = 0
                    current = candidate
                    improved = True
                else:
                    for i in moved:
                        labels[i] = b
        # joint relocation of two companies (capacity checked on the pair)
        if m <= 40:
            for i in range(m):
                for k in range(i + 1, m):
                    src_i, src_k = labels[i], labels[k]
                    for a in range(n):
                        for b in range(n):
                            if a == src_i and b == src_k:
                                continue
                            labels[i], labels[k] = a, b
                            if not feasible():
                                labels[i], labels[k] = src_i, src_k
                                continue
                            candidate = objective()
                            if candidate > current + 1e-12:
                                loads[src_i] -= values[i]
                                loads[src_k] -= values[k]
                                loads[a] += values[i]
                                loads[b] += values[k]
                                current = candidate
                                src_i, src_k = a, b
                                improved = True
                            else:
                                labels[i], labels[k] = src_i, src_k
    return labels


def optimize_portfolio(
    companies: list[CompanySite],
    n: int,
    threshold: Money,
    seed: int = 0,
    method: str = "auto",
    pair_distances: list[list[float]] | None = None,
) -> VirtualAssignment:
    """Best feasible assignment of companies to at most n virtual entities.

    method="auto" enumerates exactly when the labeled search space is within
    EXHAUSTIVE_LIMIT and otherwise runs the relaxation heuristic; "exhaustive"
    and "relaxation" force a branch (the forced relaxation is how tests
    compare the heuristic against the enumeration oracle).
    """
    if n < 1:
        raise ValidationError(f"n: must be >= 1, got {n}")
    if not companies:
        raise ValidationError("companies: must be non-empty")
    if method not in ("auto", "exhaustive", "relaxation"):
        raise ValidationError(f"method: unknown method {method!r}")

    if method == "auto":
        method = "exhaustive" if n ** len(companies) <= EXHAUSTIVE_LIMIT else "relaxation"
    if method == "exhaustive":
        return brute_force_portfolio(companies, n, threshold, pair_distances)

    _check_each_fits(companies, threshold)
    d = _pair_matrix(companies, pair_distances)
    values = [c.valuation.cents for c in companies]
    cap = threshold.cents

    rounded = _relax_and_round(values, d, n, cap, seed)
    extras = [_concentration_labels(values, d, n, cap)]
    extras.extend(_heavy_exclusion_labels(values, d, n, cap, k) for k in range(1, len(companies)))
    extras = [labels for labels in extras if labels is not None]
    # Polishing is the expensive step; keep the rounded solution plus the most
    # promising alternative starts.
    extras.sort(key=lambda labels: -_objective_of_labels(labels, n, d))
    candidates = [rounded] + extras[:3]

    best_labels = None
    best_obj = None
    for labels in candidates:
        labels = _local_improve(values, d, labels, n, cap)
        obj = _objective_of_labels(labels, n, d)
        if best_obj is None or obj > best_obj + 1e-12:
            best_labels, best_obj = labels, obj

    result = _assignment_from_labels(companies, best_labels, n, "relaxation", d)
    validate_assignment(companies, result, n, threshold)
    return result
