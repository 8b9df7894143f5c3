"""CSV ingestion and output.

Two input files describe an instance. The preferences file has one row
per project and one column per student; a cell holds the student's rank
(1, 2, ...) for that project, other cells stay blank. The supervisor file
has one row per project and one column per supervisor; a cell holds the
workload fraction in [0, 1] that the project would place on that
supervisor, with blank (or 0) meaning "not a supervisor of this project".

Header rows/columns with display names are auto-detected: if the first
row (or column), ignoring the corner cell, contains a non-numeric entry
it is treated as labels; otherwise synthetic labels ``S0..``, ``P0..``,
``Sup0..`` are used. Files are UTF-8, comma-separated, LF or CRLF, with
standard CSV quoting; decimal points only.

The output allocation CSV has one row per student, no header:
``student,project,rank``. The time-series CSV has a header row and one
``temperature,energy`` row per sample.
"""

from __future__ import annotations

import csv
import io as _io
from dataclasses import dataclass

from .errors import (
    DuplicateRank,
    EmptyColumn,
    InfeasibleAllocation,
    MalformedCell,
    NonContiguousRanks,
    RowCountMismatch,
    WorkloadOutOfRange,
)
from .model import Allocation, Dataset, histogram_of, validate_dataset


def _read_rows(text: str) -> list[list[str]]:
    """Parse CSV text into a rectangular grid of stripped cells."""
    rows = [
        [cell.strip() for cell in row]
        for row in csv.reader(_io.StringIO(text))
        if row
    ]
    if not rows:
        raise MalformedCell("file contains no rows")
    width = max(len(row) for row in rows)
    for row in rows:
        row.extend([""] * (width - len(row)))
    return rows


def _is_numeric(cell: str) -> bool:
    if not cell:
        return True
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _detect_headers(rows: list[list[str]]) -> tuple[bool, bool]:
    """(header row present, header column present), corner cell ignored."""
    header_row = any(not _is_numeric(cell) for cell in rows[0][1:])
    header_col = any(not _is_numeric(row[0]) for row in rows[1:])
    return header_row, header_col


def _split_headers(
    rows: list[list[str]],
) -> tuple[list[list[str]], tuple[str, ...] | None, tuple[str, ...] | None]:
    """Strip detected headers; returns (data cells, column labels, row labels)."""
    header_row, header_col = _detect_headers(rows)
    col_labels = tuple(rows[0][1 if header_col else 0 :]) if header_row else None
    row_labels = (
        tuple(row[0] for row in rows[1 if header_row else 0 :]) if header_col else None
    )
    data = [row[1 if header_col else 0 :] for row in rows[1 if header_row else 0 :]]
    if not data or not data[0]:
        raise MalformedCell("file contains headers but no data cells")
    return data, col_labels, row_labels


@dataclass(frozen=True)
class PreferencesFile:
    """Parsed preferences: per-student project ids in rank order."""

    choices: tuple[tuple[int, ...], ...]
    n_projects: int
    student_labels: tuple[str, ...] | None
    project_labels: tuple[str, ...] | None


@dataclass(frozen=True)
class SupervisorFile:
    """Parsed supervisor constraints: (project, supervisor) -> fraction."""

    workload: dict[tuple[int, int], float]
    n_projects: int
    n_supervisors: int
    project_labels: tuple[str, ...] | None
    supervisor_labels: tuple[str, ...] | None


def parse_preferences(text: str) -> PreferencesFile:
    """Parse the preferences CSV into rank-ordered choice lists.

    Each student column must contain each rank at most once and the ranks
    must form a contiguous run 1..r. Raises MalformedCell, DuplicateRank,
    NonContiguousRanks or EmptyColumn, naming the offending cell.
    """
    data, student_labels, project_labels = _split_headers(_read_rows(text))
    n_projects = len(data)
    n_students = len(data[0])

    choices = []
    for col in range(n_students):
        by_rank: dict[int, int] = {}
        for row in range(n_projects):
            cell = data[row][col]
            if not cell:
                continue
            try:
                rank = int(cell)
            except ValueError:
                raise MalformedCell(
                    f"preferences cell at project row {row}, student column {col} "
                    f"is {cell!r}, expected a rank integer or blank"
                ) from None
            if rank < 1:
                raise MalformedCell(
                    f"preferences cell at project row {row}, student column {col} "
                    f"holds rank {rank}; ranks start at 1"
                )
            if rank in by_rank:
                raise DuplicateRank(
                    f"student column {col} assigns rank {rank} to project rows "
                    f"{by_rank[rank]} and {row}"
                )
            by_rank[rank] = row
        if not by_rank:
            raise EmptyColumn(f"student column {col} contains no choices")
        top = max(by_rank)
        if sorted(by_rank) != list(range(1, top + 1)):
            missing = sorted(set(range(1, top + 1)) - set(by_rank))
            raise NonContiguousRanks(
                f"student column {col} uses ranks {sorted(by_rank)}; "
                f"missing {missing}"
            )
        choices.append(tuple(by_rank[rank] for rank in range(1, top + 1)))

    return PreferencesFile(
        choices=tuple(choices),
        n_projects=n_projects,
        student_labels=student_labels,
        project_labels=project_labels,
    )


def parse_supervisors(text: str) -> SupervisorFile:
    """Parse the supervisor CSV into a (project, supervisor) -> fraction map.

    Blank cells and explicit zeros both mean "not a supervisor of this
    project" and produce no entry. Raises MalformedCell or
    WorkloadOutOfRange, naming the offending cell.
    """
    data, supervisor_labels, project_labels = _split_headers(_read_rows(text))
    workload: dict[tuple[int, int], float] = {}
    for row, cells in enumerate(data):
        for col, cell in enumerate(cells):
            if not cell:
                continue
            try:
                fraction = float(cell)
            except ValueError:
                raise MalformedCell(
                    f"supervisor cell at project row {row}, supervisor column {col} "
                    f"is {cell!r}, expected a fraction or blank"
                ) from None
            if not 0.0 <= fraction <= 1.0:
                raise WorkloadOutOfRange(
                    f"supervisor cell at project row {row}, supervisor column {col} "
                    f"is {fraction}, outside [0, 1]"
                )
            if fraction > 0.0:
                workload[(row, col)] = fraction
    return SupervisorFile(
        workload=workload,
        n_projects=len(data),
        n_supervisors=len(data[0]),
        project_labels=project_labels,
        supervisor_labels=supervisor_labels,
    )


def load_dataset(preferences_text: str, supervisors_text: str) -> Dataset:
    """Build and validate a Dataset from the two input files.

    The files must list projects in the same row order; a differing row
    count raises RowCountMismatch.
    """
    prefs = parse_preferences(preferences_text)
    sups = parse_supervisors(supervisors_text)
    if prefs.n_projects != sups.n_projects:
        raise RowCountMismatch(
            f"preferences file has {prefs.n_projects} project rows but the "
            f"supervisor file has {sups.n_projects}"
        )
    dataset = Dataset(
        choices=prefs.choices,
        n_projects=prefs.n_projects,
        n_supervisors=sups.n_supervisors,
        workload=sups.workload,
        n_choices=max(len(ch) for ch in prefs.choices),
        student_labels=prefs.student_labels,
        project_labels=prefs.project_labels or sups.project_labels,
        supervisor_labels=sups.supervisor_labels,
    )
    return validate_dataset(dataset)


def _csv_text(rows: list[list[str]]) -> str:
    buffer = _io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(rows)
    return buffer.getvalue()


def write_preferences(dataset: Dataset) -> str:
    """Serialize choices back to the preferences CSV format, with headers."""
    header = [""] + [dataset.student_label(i) for i in range(dataset.n_students)]
    grid = [["" for _ in range(dataset.n_students)] for _ in range(dataset.n_projects)]
    for student, student_choices in enumerate(dataset.choices):
        for rank_idx, project in enumerate(student_choices):
            grid[project][student] = str(rank_idx + 1)
    rows = [header]
    for project in range(dataset.n_projects):
        rows.append([dataset.project_label(project)] + grid[project])
    return _csv_text(rows)


def write_supervisors(dataset: Dataset) -> str:
    """Serialize the workload map back to the supervisor CSV format."""
    header = [""] + [dataset.supervisor_label(s) for s in range(dataset.n_supervisors)]
    rows = [header]
    for project in range(dataset.n_projects):
        cells = ["" for _ in range(dataset.n_supervisors)]
        for supervisor, fraction in dataset.project_supervisors[project]:
            cells[supervisor] = repr(fraction)
        rows.append([dataset.project_label(project)] + cells)
    return _csv_text(rows)


def write_allocation(dataset: Dataset, allocation: Allocation) -> str:
    """One ``student,project,rank`` row per student, in student order.

    Raises InfeasibleAllocation rather than writing a broken allocation.
    """
    histogram_of(dataset, allocation)  # feasibility gate
    rows = []
    for student, project in enumerate(allocation.assignment):
        rows.append(
            [
                dataset.student_label(student),
                dataset.project_label(project),
                str(dataset.rank_of(student, project)),
            ]
        )
    return _csv_text(rows)


def read_allocation(text: str) -> list[tuple[str, str, int]]:
    """Parse an allocation CSV back into (student, project, rank) triples."""
    triples = []
    for row in csv.reader(_io.StringIO(text)):
        if not row:
            continue
        if len(row) != 3:
            raise MalformedCell(f"allocation row {row!r} does not have 3 fields")
        try:
            rank = int(row[2])
        except ValueError:
            raise MalformedCell(f"allocation rank {row[2]!r} is not an integer") from None
        triples.append((row[0], row[1], rank))
    return triples


def write_time_series(samples: list[tuple[float, float]]) -> str:
    """Two-column ``temperature,energy`` CSV; header only when empty."""
    rows = [["temperature", "energy"]]
    for temperature, energy in samples:
        rows.append([repr(float(temperature)), repr(float(energy))])
    return _csv_text(rows)
