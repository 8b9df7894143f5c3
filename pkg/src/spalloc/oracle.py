"""Exhaustive reference solver for small instances.

Enumerates every feasible allocation by depth-first assignment with
conflict and workload pruning, which makes it the ground truth for
validating the stochastic solver and for counting energy-degenerate
optima. Only viable when the product of choice-list lengths is small.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

from .errors import Infeasible, InstanceTooLarge
from .model import LOAD_TOLERANCE, Allocation, Dataset, WeightScheme

_LOAD_CAP = 1.0 + LOAD_TOLERANCE

#: Refuse instances with more candidate assignments than this.
DEFAULT_CANDIDATE_CAP = 10_000_000

#: Energies closer than this are treated as ties when collecting optima.
_TIE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class OracleResult:
    """Exact optimum plus the full set of allocations attaining it."""

    minimum_raw: float
    minima: tuple[Allocation, ...]
    feasible_count: int


def candidate_count(dataset: Dataset) -> int:
    """Number of raw assignments, feasible or not."""
    return math.prod(len(ch) for ch in dataset.choices)


def enumerate_feasible(
    dataset: Dataset, *, cap: int = DEFAULT_CANDIDATE_CAP
) -> Iterator[Allocation]:
    """Yield every feasible allocation exactly once.

    Students are assigned in order of fewest choices first (fail-first);
    yielded allocations are indexed in the original student order, so the
    set produced does not depend on the search order.
    """
    candidates = candidate_count(dataset)
    if candidates > cap:
        raise InstanceTooLarge(
            f"{candidates} candidate assignments exceed the cap of {cap}"
        )
    n = dataset.n_students
    order = sorted(range(n), key=lambda i: len(dataset.choices[i]))
    sups = dataset.project_supervisors
    assignment = [-1] * n
    used: set[int] = set()
    loads = [0.0] * dataset.n_supervisors

    def descend(depth: int) -> Iterator[Allocation]:
        if depth == n:
            yield Allocation(tuple(assignment))
            return
        student = order[depth]
        for project in dataset.choices[student]:
            if project in used:
                continue
            pairs = sups[project]
            if any(loads[s] + f > _LOAD_CAP for s, f in pairs):
                continue
            assignment[student] = project
            used.add(project)
            for s, f in pairs:
                loads[s] += f
            yield from descend(depth + 1)
            for s, f in pairs:
                loads[s] -= f
            used.remove(project)
            assignment[student] = -1

    return descend(0)


def exact_minimum(
    dataset: Dataset, scheme: WeightScheme, *, cap: int = DEFAULT_CANDIDATE_CAP
) -> OracleResult:
    """Minimum raw energy over all feasible allocations, with every optimum.

    Raises Infeasible when no feasible allocation exists, and
    InstanceTooLarge when enumeration would exceed ``cap`` candidates.
    """
    weights = scheme.weights
    choices = dataset.choices
    best = math.inf
    minima: list[tuple[float, Allocation]] = []
    feasible_count = 0
    for allocation in enumerate_feasible(dataset, cap=cap):
        feasible_count += 1
        energy = -sum(
            weights[choices[i].index(p)] for i, p in enumerate(allocation.assignment)
        )
        if energy < best - _TIE_TOLERANCE:
            best = energy
            minima = [(energy, allocation)]
        elif energy <= best + _TIE_TOLERANCE:
            minima.append((energy, allocation))
    if feasible_count == 0:
        raise Infeasible("no feasible allocation exists for this instance")
    kept = tuple(a for e, a in minima if e <= best + _TIE_TOLERANCE)
    return OracleResult(minimum_raw=best, minima=kept, feasible_count=feasible_count)
