"""Domain model: datasets, allocations, rank weights, and feasibility checks.

Conventions used throughout the package:
  * students, projects and supervisors are dense 0-based integer ids;
  * ranks are 1-based (rank 1 = first choice) in every public signature;
  * a supervisor may carry at most a total workload of 1.0 over the
    projects assigned to them, where each project contributes a fraction
    in [0, 1] per supervisor.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping

from .errors import (
    DuplicateChoice,
    EmptyColumn,
    InfeasibleAllocation,
    OrphanProject,
    UnknownProject,
    UnknownSupervisor,
    WorkloadOutOfRange,
)

# Absorbs float drift when summing workload fractions against the unit cap.
LOAD_TOLERANCE = 1e-9


@dataclass(frozen=True)
class WeightScheme:
    """Per-rank satisfaction weights, strictly decreasing and positive."""

    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.weights:
            raise ValueError("weight scheme must contain at least one weight")
        if any(w <= 0 for w in self.weights):
            raise ValueError(f"weights must be positive: {self.weights}")
        for a, b in zip(self.weights, self.weights[1:]):
            if not a > b:
                raise ValueError(f"weights must be strictly decreasing: {self.weights}")

    def __len__(self) -> int:
        return len(self.weights)

    def weight(self, rank: int) -> float:
        """Weight of the 1-based rank."""
        return self.weights[rank - 1]


#: Linearly decreasing weights, the default scheme.
LINEAR = WeightScheme((4.0, 3.0, 2.0, 1.0))

#: Weights fitted to a student satisfaction survey; non-linear in the rank,
#: which breaks many of the ties the linear scheme leaves between allocations.
OPINION = WeightScheme((4.7, 4.15, 3.0, 2.35))


@dataclass(frozen=True)
class Dataset:
    """An immutable allocation instance.

    ``choices[i]`` lists student i's chosen project ids in preference order
    (index 0 = first choice). ``workload`` maps ``(project, supervisor)`` to
    the fraction of that supervisor's capacity the project consumes.
    ``n_choices`` is the nominal maximum list length; individual lists may
    be shorter. Labels are optional display names; synthetic ones are
    generated on demand.
    """

    choices: tuple[tuple[int, ...], ...]
    n_projects: int
    n_supervisors: int
    workload: Mapping[tuple[int, int], float]
    n_choices: int = 4
    student_labels: tuple[str, ...] | None = None
    project_labels: tuple[str, ...] | None = None
    supervisor_labels: tuple[str, ...] | None = None

    @property
    def n_students(self) -> int:
        return len(self.choices)

    @cached_property
    def project_supervisors(self) -> tuple[tuple[tuple[int, float], ...], ...]:
        """Per-project ``(supervisor, fraction)`` pairs, supervisor-sorted."""
        per_project: list[list[tuple[int, float]]] = [[] for _ in range(self.n_projects)]
        for (project, supervisor), fraction in self.workload.items():
            if fraction > 0:
                per_project[project].append((supervisor, fraction))
        return tuple(tuple(sorted(pairs)) for pairs in per_project)

    def rank_of(self, student: int, project: int) -> int | None:
        """1-based rank of ``project`` on the student's list, or None."""
        try:
            return self.choices[student].index(project) + 1
        except ValueError:
            return None

    def student_label(self, i: int) -> str:
        return self.student_labels[i] if self.student_labels else f"S{i}"

    def project_label(self, j: int) -> str:
        return self.project_labels[j] if self.project_labels else f"P{j}"

    def supervisor_label(self, s: int) -> str:
        return self.supervisor_labels[s] if self.supervisor_labels else f"Sup{s}"


@dataclass(frozen=True)
class Allocation:
    """One project id per student; index i holds student i's project."""

    assignment: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.assignment)


@dataclass(frozen=True)
class AllocationHistogram:
    """Counts of students receiving their k-th choice, k = 1..R."""

    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)


class ViolationKind(str, Enum):
    CHOICE = "ChoiceViolation"
    PROJECT_CONFLICT = "ProjectConflict"
    SUPERVISOR_OVERLOAD = "SupervisorOverload"


@dataclass(frozen=True)
class Violation:
    """One constraint failure; ``subject`` is the offending entity id."""

    kind: ViolationKind
    subject: int
    message: str


def validate_dataset(dataset: Dataset) -> Dataset:
    """Check every dataset invariant; return the dataset unchanged if valid.

    Raises DuplicateChoice, UnknownProject, UnknownSupervisor,
    WorkloadOutOfRange, OrphanProject or EmptyColumn, naming the offending
    entity in the message.
    """
    if dataset.n_projects < 1:
        raise UnknownProject("dataset must offer at least one project")
    if dataset.n_students < 1:
        raise EmptyColumn("dataset must contain at least one student")

    for i, student_choices in enumerate(dataset.choices):
        if not student_choices:
            raise EmptyColumn(f"student {dataset.student_label(i)} has no choices")
        if len(student_choices) > dataset.n_choices:
            raise UnknownProject(
                f"student {dataset.student_label(i)} lists {len(student_choices)} "
                f"choices but the dataset allows {dataset.n_choices}"
            )
        seen: set[int] = set()
        for project in student_choices:
            if not 0 <= project < dataset.n_projects:
                raise UnknownProject(
                    f"student {dataset.student_label(i)} chose unknown project id {project}"
                )
            if project in seen:
                raise DuplicateChoice(
                    f"student {dataset.student_label(i)} lists project "
                    f"{dataset.project_label(project)} more than once"
                )
            seen.add(project)

    supervised: set[int] = set()
    for (project, supervisor), fraction in dataset.workload.items():
        if not 0 <= project < dataset.n_projects:
            raise UnknownProject(f"workload entry names unknown project id {project}")
        if not 0 <= supervisor < dataset.n_supervisors:
            raise UnknownSupervisor(f"workload entry names unknown supervisor id {supervisor}")
        if not 0.0 <= fraction <= 1.0:
            raise WorkloadOutOfRange(
                f"workload for project {dataset.project_label(project)}, supervisor "
                f"{dataset.supervisor_label(supervisor)} is {fraction}, outside [0, 1]"
            )
        if fraction > 0:
            supervised.add(project)

    for project in range(dataset.n_projects):
        if project not in supervised:
            raise OrphanProject(
                f"project {dataset.project_label(project)} has no supervisor "
                "with a positive workload fraction"
            )
    return dataset


def supervisor_loads(dataset: Dataset, assignment: Iterable[int]) -> list[float]:
    """Total assigned workload fraction per supervisor."""
    loads = [0.0] * dataset.n_supervisors
    for project in assignment:
        for supervisor, fraction in dataset.project_supervisors[project]:
            loads[supervisor] += fraction
    return loads


def is_feasible(dataset: Dataset, allocation: Allocation) -> tuple[bool, list[Violation]]:
    """Check the three allocation constraints; violations are data, not errors.

    Returns ``(True, [])`` when every student holds a project from their own
    list, no project is held twice, and no supervisor exceeds unit workload.
    """
    if len(allocation) != dataset.n_students:
        raise ValueError(
            f"allocation has {len(allocation)} entries for {dataset.n_students} students"
        )
    violations: list[Violation] = []

    holders: dict[int, list[int]] = {}
    for student, project in enumerate(allocation.assignment):
        if dataset.rank_of(student, project) is None:
            violations.append(
                Violation(
                    ViolationKind.CHOICE,
                    student,
                    f"student {dataset.student_label(student)} assigned project id "
                    f"{project}, which is not on their choice list",
                )
            )
        holders.setdefault(project, []).append(student)

    for project, students in sorted(holders.items()):
        if len(students) > 1:
            names = ", ".join(dataset.student_label(s) for s in students)
            violations.append(
                Violation(
                    ViolationKind.PROJECT_CONFLICT,
                    project,
                    f"project {dataset.project_label(project)} assigned to {names}",
                )
            )

    loads = supervisor_loads(dataset, allocation.assignment)
    for supervisor, load in enumerate(loads):
        if load > 1.0 + LOAD_TOLERANCE:
            violations.append(
                Violation(
                    ViolationKind.SUPERVISOR_OVERLOAD,
                    supervisor,
                    f"supervisor {dataset.supervisor_label(supervisor)} carries "
                    f"workload {load:.3f} > 1",
                )
            )

    return not violations, violations


def histogram_of(dataset: Dataset, allocation: Allocation) -> AllocationHistogram:
    """Histogram of received ranks for a feasible allocation."""
    feasible, violations = is_feasible(dataset, allocation)
    if not feasible:
        detail = "; ".join(v.message for v in violations[:3])
        raise InfeasibleAllocation(f"allocation is infeasible: {detail}")
    counts = [0] * dataset.n_choices
    for student, project in enumerate(allocation.assignment):
        rank = dataset.rank_of(student, project)
        counts[rank - 1] += 1
    return AllocationHistogram(tuple(counts))
