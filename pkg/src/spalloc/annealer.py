"""Repair-based initialization, Metropolis moves, and the cooling loop.

A proposal re-assigns one uniformly random student to a uniformly random
rank on their own choice list (redrawing while the rank equals the current
one), then filters: project conflicts first, supervisor overloads second,
and finally the Metropolis acceptance test with probability
min(1, exp(-delta / T)). At T = 0 only non-increasing moves are accepted.

Two implementations of the move exist: ``MoveState.step`` is the readable
reference used by ``propose_and_decide`` and by ``anneal`` in verification
mode, while ``_run_level`` is an inlined copy used by default because the
cooling loop performs on the order of 10^8 moves per run. Both consume the
random stream identically (one draw per student pick, one per rank pick
plus redraws, one per Metropolis test on uphill moves only), which the
test suite pins by replaying runs through both paths.

Randomness comes from ``random.Random`` (Mersenne Twister), seeded once
per run; identical seeds reproduce runs exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from random import Random
from typing import Callable, Sequence

from .errors import InfeasibleAllocation, RepairTimeout
from .model import (
    LOAD_TOLERANCE,
    Allocation,
    AllocationHistogram,
    Dataset,
    WeightScheme,
    is_feasible,
    supervisor_loads,
)
from .objective import Energy, energy_normalized

_LOAD_CAP = 1.0 + LOAD_TOLERANCE


@dataclass(frozen=True)
class Schedule:
    """Cooling schedule and per-temperature move budgets.

    At each temperature, moves are attempted until both ``attempted_budget_factor * N``
    attempts and ``success_budget_factor * N`` acceptances have occurred,
    with a hard cap of ``hard_cap_factor * N`` attempts so that frozen
    low-temperature levels still terminate.
    """

    t_start: float = 5.0
    t_end: float = 0.0
    t_step: float = 0.001
    attempted_budget_factor: int = 1000
    success_budget_factor: int = 100
    hard_cap_factor: int = 10_000

    def __post_init__(self) -> None:
        if not self.t_start >= self.t_end >= 0.0:
            raise ValueError(f"need t_start >= t_end >= 0, got {self.t_start}..{self.t_end}")
        if self.t_step <= 0.0:
            raise ValueError(f"temperature step must be positive, got {self.t_step}")
        for name in ("attempted_budget_factor", "success_budget_factor", "hard_cap_factor"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    def temperatures(self) -> list[float]:
        """Cooling levels ``t_start - i * t_step``, ending at ``t_end``.

        Levels are generated from an integer step index so that 5001 steps
        do not accumulate float drift; the last level is clamped to exactly
        ``t_end`` when the span is a whole number of steps.
        """
        steps = round((self.t_start - self.t_end) / self.t_step)
        while steps > 0 and self.t_start - steps * self.t_step < self.t_end - 1e-12:
            steps -= 1
        levels = []
        for i in range(steps + 1):
            t = self.t_start - i * self.t_step
            levels.append(self.t_end if t < self.t_end else t)
        return levels


class MoveKind(Enum):
    ACCEPTED = "accepted"
    REJECTED_CONFLICT = "rejected_conflict"
    REJECTED_OVERLOAD = "rejected_overload"
    REJECTED_METROPOLIS = "rejected_metropolis"
    REJECTED_NO_ALTERNATIVE = "rejected_no_alternative"


@dataclass(frozen=True)
class MoveOutcome:
    """Result of a single proposal. Ranks are 1-based.

    ``to_rank`` is None when the student has a single choice and no
    alternative rank exists; ``delta`` is None unless the proposal survived
    the conflict and workload filters and reached the Metropolis test.
    """

    kind: MoveKind
    student: int
    from_rank: int
    to_rank: int | None
    delta: float | None


@dataclass(frozen=True)
class MoveCounters:
    """Per-run proposal tallies; always sums: attempted = accepted + rejections."""

    attempted: int
    accepted: int
    rejected_conflict: int
    rejected_overload: int
    rejected_metropolis: int
    rejected_no_alternative: int

    def __post_init__(self) -> None:
        rejected = (
            self.rejected_conflict
            + self.rejected_overload
            + self.rejected_metropolis
            + self.rejected_no_alternative
        )
        if self.attempted != self.accepted + rejected:
            raise ValueError(
                f"inconsistent counters: {self.attempted} attempted != "
                f"{self.accepted} accepted + {rejected} rejected"
            )


@dataclass(frozen=True)
class RunResult:
    """Everything one annealing run produces.

    ``series`` holds one ``(temperature, normalized energy)`` sample per
    temperature level, recorded after that level's moves.
    """

    allocation: Allocation
    energy: Energy
    histogram: AllocationHistogram
    series: tuple[tuple[float, float], ...]
    counters: MoveCounters
    seed: int


class MoveState:
    """Incrementally maintained solver state; one proposal costs O(1).

    Tracks the assignment, each student's current rank (0-based
    internally), which student holds each project, per-supervisor loads,
    and the raw energy. The starting assignment must be conflict-free and
    on-list; supervisor loads are trusted as given.
    """

    __slots__ = (
        "dataset",
        "scheme",
        "assignment",
        "rank_idx",
        "holder",
        "loads",
        "energy_raw",
        "choices",
        "weights",
        "project_sups",
        "project_sup_frac",
    )

    def __init__(self, dataset: Dataset, scheme: WeightScheme, assignment: Sequence[int]):
        self.dataset = dataset
        self.scheme = scheme
        self.choices = dataset.choices
        self.weights = scheme.weights
        self.project_sups = dataset.project_supervisors
        self.project_sup_frac = [dict(pairs) for pairs in self.project_sups]
        self.assignment = list(assignment)
        self.rank_idx = []
        self.holder = [-1] * dataset.n_projects
        for student, project in enumerate(self.assignment):
            rank = dataset.rank_of(student, project)
            if rank is None:
                raise InfeasibleAllocation(
                    f"student {student} holds project {project}, not on their list"
                )
            if self.holder[project] >= 0:
                raise InfeasibleAllocation(
                    f"project {project} held by students {self.holder[project]} and {student}"
                )
            self.rank_idx.append(rank - 1)
            self.holder[project] = student
        self.loads = supervisor_loads(dataset, self.assignment)
        self.energy_raw = -sum(self.weights[r] for r in self.rank_idx)

    def allocation(self) -> Allocation:
        return Allocation(tuple(self.assignment))

    def rank_counts(self) -> list[int]:
        counts = [0] * self.dataset.n_choices
        for r in self.rank_idx:
            counts[r] += 1
        return counts

    def refresh(self) -> None:
        """Recompute loads and energy from scratch, discarding float drift."""
        self.loads = supervisor_loads(self.dataset, self.assignment)
        self.energy_raw = -sum(self.weights[r] for r in self.rank_idx)

    def step(self, temperature: float, rng: Random) -> MoveOutcome:
        """Propose and decide one move; mutates the state on acceptance."""
        rand = rng.random
        si = int(rand() * len(self.assignment))
        student_choices = self.choices[si]
        r_len = len(student_choices)
        cur = self.rank_idx[si]
        if r_len < 2:
            return MoveOutcome(MoveKind.REJECTED_NO_ALTERNATIVE, si, cur + 1, None, None)
        nr = int(rand() * r_len)
        while nr == cur:
            nr = int(rand() * r_len)
        new_project = student_choices[nr]
        if self.holder[new_project] >= 0:
            return MoveOutcome(MoveKind.REJECTED_CONFLICT, si, cur + 1, nr + 1, None)
        old_project = self.assignment[si]
        pairs = self.project_sups[new_project]
        old_frac = self.project_sup_frac[old_project]
        for supervisor, fraction in pairs:
            if self.loads[supervisor] + fraction - old_frac.get(supervisor, 0.0) > _LOAD_CAP:
                return MoveOutcome(MoveKind.REJECTED_OVERLOAD, si, cur + 1, nr + 1, None)
        delta = self.weights[cur] - self.weights[nr]
        if delta > 0.0:
            if temperature <= 0.0 or rand() >= math.exp(-delta / temperature):
                return MoveOutcome(MoveKind.REJECTED_METROPOLIS, si, cur + 1, nr + 1, delta)
        self.holder[old_project] = -1
        self.holder[new_project] = si
        self.assignment[si] = new_project
        self.rank_idx[si] = nr
        for supervisor, fraction in self.project_sups[old_project]:
            self.loads[supervisor] -= fraction
        for supervisor, fraction in pairs:
            self.loads[supervisor] += fraction
        self.energy_raw += delta
        return MoveOutcome(MoveKind.ACCEPTED, si, cur + 1, nr + 1, delta)


def propose_and_decide(
    dataset: Dataset,
    allocation: Allocation,
    temperature: float,
    scheme: WeightScheme,
    rng: Random,
) -> tuple[MoveOutcome, Allocation]:
    """One-shot proposal on a feasible allocation.

    Returns the outcome and the (possibly unchanged) allocation. Bulk
    callers should hold a ``MoveState`` and call ``step`` instead.
    """
    state = MoveState(dataset, scheme, allocation.assignment)
    outcome = state.step(temperature, rng)
    return outcome, state.allocation()


def _count_violations(dataset: Dataset, assignment: list[int]) -> int:
    """Project-conflict excess plus the number of overloaded supervisors."""
    holders = [0] * dataset.n_projects
    for project in assignment:
        holders[project] += 1
    conflicts = sum(c - 1 for c in holders if c > 1)
    overloads = sum(1 for load in supervisor_loads(dataset, assignment) if load > _LOAD_CAP)
    return conflicts + overloads


def repair_initialize(
    dataset: Dataset,
    rng: Random,
    *,
    move_cap: int | None = None,
    strict_descent: bool = False,
) -> Allocation:
    """Produce a feasible allocation by a violation-reducing random walk.

    Every student starts on a random choice from their list; then random
    single-student re-assignments are accepted whenever they do not
    increase the total violation count (conflict excess plus overloaded
    supervisors). ``strict_descent`` accepts only strict reductions, which
    can stall on plateaus; the default also walks across them.

    Raises RepairTimeout after ``move_cap`` proposals (default
    ``max(20000, 2000 * N)``), which usually signals an infeasible instance.
    """
    n = dataset.n_students
    if move_cap is None:
        move_cap = max(20_000, 2_000 * n)
    rand = rng.random

    choices = dataset.choices
    assignment = [ch[int(rand() * len(ch))] for ch in choices]

    holders = [0] * dataset.n_projects
    for project in assignment:
        holders[project] += 1
    loads = supervisor_loads(dataset, assignment)
    sups = dataset.project_supervisors
    frac = [dict(pairs) for pairs in sups]
    total = _count_violations(dataset, assignment)

    moves = 0
    while total > 0:
        if moves >= move_cap:
            raise RepairTimeout(
                f"still {total} constraint violations after {move_cap} repair moves; "
                "the instance is likely infeasible"
            )
        moves += 1
        si = int(rand() * n)
        ch = choices[si]
        new_project = ch[int(rand() * len(ch))]
        old_project = assignment[si]
        if new_project == old_project:
            continue

        # Conflict-count change: leaving a shared project removes one excess,
        # entering an occupied project adds one.
        delta = 0
        if holders[old_project] > 1:
            delta -= 1
        if holders[new_project] > 0:
            delta += 1

        # Overload-count change over the supervisors touched by the move.
        affected = set(frac[old_project]) | set(frac[new_project])
        for supervisor in affected:
            load = loads[supervisor]
            new_load = (
                load
                - frac[old_project].get(supervisor, 0.0)
                + frac[new_project].get(supervisor, 0.0)
            )
            delta += (1 if new_load > _LOAD_CAP else 0) - (1 if load > _LOAD_CAP else 0)

        if delta > 0 or (strict_descent and delta == 0):
            continue

        assignment[si] = new_project
        holders[old_project] -= 1
        holders[new_project] += 1
        for supervisor, fraction in sups[old_project]:
            loads[supervisor] -= fraction
        for supervisor, fraction in sups[new_project]:
            loads[supervisor] += fraction
        total += delta

    return Allocation(tuple(assignment))


def _run_level(
    state: MoveState,
    temperature: float,
    rng: Random,
    att_budget: int,
    succ_budget: int,
    hard_cap: int,
) -> tuple[int, int, int, int, int, int]:
    """One temperature level's moves, inlined for speed.

    Mirrors ``MoveState.step`` exactly, including random-stream usage.
    Returns (attempted, accepted, conflict, overload, metropolis,
    no-alternative) counts for the level.
    """
    rand = rng.random
    exp = math.exp
    assignment = state.assignment
    rank_idx = state.rank_idx
    holder = state.holder
    loads = state.loads
    choices = state.choices
    weights = state.weights
    sups = state.project_sups
    sup_frac = state.project_sup_frac
    cap = _LOAD_CAP
    n = len(assignment)
    # Same expression as MoveState.step, down to the division, so both
    # paths make bit-identical acceptance decisions.
    frozen = temperature <= 0.0
    energy = state.energy_raw

    attempted = accepted = conflicts = overloads = metropolis = no_alt = 0
    while (attempted < att_budget or accepted < succ_budget) and attempted < hard_cap:
        attempted += 1
        si = int(rand() * n)
        ch = choices[si]
        r_len = len(ch)
        cur = rank_idx[si]
        if r_len < 2:
            no_alt += 1
            continue
        nr = int(rand() * r_len)
        while nr == cur:
            nr = int(rand() * r_len)
        new_project = ch[nr]
        if holder[new_project] >= 0:
            conflicts += 1
            continue
        old_project = assignment[si]
        pairs = sups[new_project]
        old_frac = sup_frac[old_project]
        ok = True
        for supervisor, fraction in pairs:
            if loads[supervisor] + fraction - old_frac.get(supervisor, 0.0) > cap:
                ok = False
                break
        if not ok:
            overloads += 1
            continue
        delta = weights[cur] - weights[nr]
        if delta > 0.0 and (frozen or rand() >= exp(-delta / temperature)):
            metropolis += 1
            continue
        holder[old_project] = -1
        holder[new_project] = si
        assignment[si] = new_project
        rank_idx[si] = nr
        for supervisor, fraction in sups[old_project]:
            loads[supervisor] -= fraction
        for supervisor, fraction in pairs:
            loads[supervisor] += fraction
        energy += delta
        accepted += 1

    state.energy_raw = energy
    return attempted, accepted, conflicts, overloads, metropolis, no_alt


def _run_level_verified(
    state: MoveState,
    temperature: float,
    rng: Random,
    att_budget: int,
    succ_budget: int,
    hard_cap: int,
) -> tuple[int, int, int, int, int, int]:
    """Reference level runner: drives ``MoveState.step`` and re-checks
    feasibility after every acceptance. Slow; used for verification."""
    dataset = state.dataset
    tallies = {kind: 0 for kind in MoveKind}
    attempted = 0
    while (
        attempted < att_budget or tallies[MoveKind.ACCEPTED] < succ_budget
    ) and attempted < hard_cap:
        attempted += 1
        outcome = state.step(temperature, rng)
        tallies[outcome.kind] += 1
        if outcome.kind is MoveKind.ACCEPTED:
            feasible, violations = is_feasible(dataset, state.allocation())
            if not feasible:
                raise InfeasibleAllocation(
                    f"accepted move broke feasibility: {violations[0].message}"
                )
    return (
        attempted,
        tallies[MoveKind.ACCEPTED],
        tallies[MoveKind.REJECTED_CONFLICT],
        tallies[MoveKind.REJECTED_OVERLOAD],
        tallies[MoveKind.REJECTED_METROPOLIS],
        tallies[MoveKind.REJECTED_NO_ALTERNATIVE],
    )


def anneal(
    dataset: Dataset,
    scheme: WeightScheme,
    schedule: Schedule,
    seed: int,
    *,
    progress: Callable[[float, float], None] | None = None,
    verify_every_move: bool = False,
) -> RunResult:
    """Run one simulated-annealing optimization.

    Repairs a random assignment into a feasible starting allocation, then
    cools from ``t_start`` to ``t_end``, spending the schedule's move
    budget at each level and recording one time-series sample per level.
    Repair moves do not count toward the first level's budget. The
    returned allocation is always feasible; its energy is not guaranteed
    to beat the initial one (the walk is stochastic), but in practice it
    does.

    ``progress`` is called as ``progress(temperature, normalized_energy)``
    after each level. ``verify_every_move`` switches to the step-by-step
    reference loop that re-checks feasibility after every acceptance;
    results are identical, just much slower.

    Raises RepairTimeout when no feasible starting allocation is found.
    """
    rng = Random(seed)
    initial = repair_initialize(dataset, rng)
    state = MoveState(dataset, scheme, initial.assignment)

    n = dataset.n_students
    att_budget = schedule.attempted_budget_factor * n
    succ_budget = schedule.success_budget_factor * n
    hard_cap = schedule.hard_cap_factor * n
    run_level = _run_level_verified if verify_every_move else _run_level

    totals = [0, 0, 0, 0, 0, 0]
    series: list[tuple[float, float]] = []
    for temperature in schedule.temperatures():
        level_counts = run_level(state, temperature, rng, att_budget, succ_budget, hard_cap)
        for i, count in enumerate(level_counts):
            totals[i] += count
        state.refresh()
        histogram = AllocationHistogram(tuple(state.rank_counts()))
        e_norm = energy_normalized(histogram, scheme, n)
        series.append((temperature, e_norm))
        if progress is not None:
            progress(temperature, e_norm)

    allocation = state.allocation()
    feasible, violations = is_feasible(dataset, allocation)
    if not feasible:
        raise InfeasibleAllocation(
            f"annealer returned an infeasible allocation: {violations[0].message}"
        )
    histogram = AllocationHistogram(tuple(state.rank_counts()))
    return RunResult(
        allocation=allocation,
        energy=Energy.of(histogram, scheme),
        histogram=histogram,
        series=tuple(series),
        counters=MoveCounters(*totals),
        seed=seed,
    )
