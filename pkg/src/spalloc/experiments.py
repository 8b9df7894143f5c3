"""Experiment harness: batch statistics, allocation profiles, choice
truncation, project-to-student ratio sweeps, and synthetic instances.

Historical cohort data is not bundled, so studies run on generated
datasets shaped like the real ones. Failed (infeasible) runs are never
silently dropped: they are excluded from the statistics but counted and
reported alongside them.
"""

from __future__ import annotations

import csv
import io as _io
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from random import Random
from typing import Sequence

from .annealer import RunResult, Schedule, anneal
from .errors import InfeasibleError
from .model import Dataset, WeightScheme, validate_dataset

# ---------------------------------------------------------------------------
# Batch runs and statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BatchStats:
    """Normalized-energy statistics over one batch of seeded runs.

    ``energies`` holds the successful runs in seed order; ``std`` is the
    sample (n-1) standard deviation, 0.0 for a single run. When every run
    failed, the three summary values are NaN.
    """

    energies: tuple[float, ...]
    minimum: float
    mean: float
    std: float
    seeds: tuple[int, ...]
    failed_seeds: tuple[int, ...]

    @property
    def n_runs(self) -> int:
        return len(self.seeds)

    @property
    def n_failed(self) -> int:
        return len(self.failed_seeds)

    @property
    def feasibility_rate(self) -> float:
        return (self.n_runs - self.n_failed) / self.n_runs


def _one_run(
    dataset: Dataset, scheme: WeightScheme, schedule: Schedule, seed: int
) -> RunResult | None:
    try:
        return anneal(dataset, scheme, schedule, seed)
    except InfeasibleError:
        return None


def batch_run(
    dataset: Dataset,
    scheme: WeightScheme,
    schedule: Schedule,
    k: int,
    base_seed: int,
    *,
    jobs: int = 1,
) -> tuple[BatchStats, list[RunResult]]:
    """Run ``k`` independent anneals with seeds ``base_seed .. base_seed+k-1``.

    Returns the statistics plus the successful RunResults in seed order.
    ``jobs > 1`` spreads runs over worker processes; results are identical
    either way because each run owns its seed.
    """
    if k < 1:
        raise ValueError(f"need at least one run, got k={k}")
    seeds = list(range(base_seed, base_seed + k))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(
                pool.map(_one_run, [dataset] * k, [scheme] * k, [schedule] * k, seeds)
            )
    else:
        outcomes = [_one_run(dataset, scheme, schedule, seed) for seed in seeds]

    results = [r for r in outcomes if r is not None]
    failed = tuple(seed for seed, r in zip(seeds, outcomes) if r is None)
    energies = tuple(r.energy.normalized for r in results)
    if energies:
        minimum = min(energies)
        mean = statistics.fmean(energies)
        std = statistics.stdev(energies) if len(energies) > 1 else 0.0
    else:
        minimum = mean = std = float("nan")
    stats = BatchStats(
        energies=energies,
        minimum=minimum,
        mean=mean,
        std=std,
        seeds=tuple(seeds),
        failed_seeds=failed,
    )
    return stats, results


def stats_csv(stats: BatchStats) -> str:
    """Single-row summary table with a feasibility-rate column."""
    buffer = _io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["runs", "failed", "feasibility_rate", "min", "mean", "std"])
    writer.writerow(
        [
            stats.n_runs,
            stats.n_failed,
            repr(stats.feasibility_rate),
            repr(stats.minimum),
            repr(stats.mean),
            repr(stats.std),
        ]
    )
    return buffer.getvalue()


# ---------------------------------------------------------------------------
# Allocation profiles (degeneracy reports)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AllocationProfile:
    """A distinct final allocation and how many runs produced it."""

    energy_normalized: float
    histogram: tuple[int, ...]
    assignment: tuple[int, ...]
    multiplicity: int


def profile_report(results: Sequence[RunResult]) -> list[AllocationProfile]:
    """Group runs by (energy, histogram) and then by the actual allocation.

    Distinct allocations sharing one energy expose the degeneracy of the
    optimum. Energies are compared after rounding to 9 decimals so that
    equal histograms always land in the same class.
    """
    if not results:
        raise ValueError("profile_report needs at least one run")
    groups: dict[tuple[float, tuple[int, ...], tuple[int, ...]], int] = {}
    for result in results:
        key = (
            round(result.energy.normalized, 9),
            result.histogram.counts,
            result.allocation.assignment,
        )
        groups[key] = groups.get(key, 0) + 1
    profiles = [
        AllocationProfile(energy, histogram, assignment, count)
        for (energy, histogram, assignment), count in groups.items()
    ]
    profiles.sort(key=lambda p: (p.energy_normalized, p.histogram, p.assignment))
    return profiles


def profiles_csv(profiles: Sequence[AllocationProfile], dataset: Dataset) -> str:
    buffer = _io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    n_ranks = len(profiles[0].histogram) if profiles else dataset.n_choices
    writer.writerow(
        ["energy", *[f"n{k}" for k in range(1, n_ranks + 1)], "runs", "allocation"]
    )
    for profile in profiles:
        writer.writerow(
            [
                repr(profile.energy_normalized),
                *profile.histogram,
                profile.multiplicity,
                " ".join(dataset.project_label(p) for p in profile.assignment),
            ]
        )
    return buffer.getvalue()


# ---------------------------------------------------------------------------
# Instance surgery: truncating choices, shifting the project/student ratio
# ---------------------------------------------------------------------------


def truncate_choices(dataset: Dataset, keep: int) -> Dataset:
    """Drop every choice ranked below ``keep``; the result allows ``keep`` ranks."""
    if not 1 <= keep < dataset.n_choices:
        raise ValueError(
            f"keep must be in 1..{dataset.n_choices - 1} for a {dataset.n_choices}-choice "
            f"dataset, got {keep}"
        )
    return Dataset(
        choices=tuple(ch[:keep] for ch in dataset.choices),
        n_projects=dataset.n_projects,
        n_supervisors=dataset.n_supervisors,
        workload=dataset.workload,
        n_choices=keep,
        student_labels=dataset.student_labels,
        project_labels=dataset.project_labels,
        supervisor_labels=dataset.supervisor_labels,
    )


def perturb_ratio(dataset: Dataset, target_ratio: float, rng: Random) -> Dataset:
    """Move the project-to-student ratio toward ``target_ratio``.

    The project list stays fixed. Raising the ratio removes uniformly
    random students; lowering it appends synthetic students whose choices
    are uniformly random distinct projects (deliberately ignoring project
    popularity). The student count minimizing ``|M/N - target|`` is used;
    exact ties keep the larger cohort.
    """
    if target_ratio <= 0:
        raise ValueError(f"target ratio must be positive, got {target_ratio}")
    m = dataset.n_projects
    n = dataset.n_students
    lo = max(1, int(m / target_ratio))
    best_n = min(
        (lo, lo + 1),
        key=lambda cand: (abs(m / cand - target_ratio), -cand),
    )
    if best_n == n:
        return dataset

    if best_n < n:
        keep = sorted(rng.sample(range(n), best_n))
        choices = tuple(dataset.choices[i] for i in keep)
        labels = (
            tuple(dataset.student_labels[i] for i in keep)
            if dataset.student_labels
            else None
        )
    else:
        extra = [
            tuple(rng.sample(range(m), dataset.n_choices)) for _ in range(best_n - n)
        ]
        choices = dataset.choices + tuple(extra)
        labels = (
            dataset.student_labels + tuple(f"S{n + i}" for i in range(best_n - n))
            if dataset.student_labels
            else None
        )
    return Dataset(
        choices=choices,
        n_projects=m,
        n_supervisors=dataset.n_supervisors,
        workload=dataset.workload,
        n_choices=dataset.n_choices,
        student_labels=labels,
        project_labels=dataset.project_labels,
        supervisor_labels=dataset.supervisor_labels,
    )


@dataclass(frozen=True)
class RatioPoint:
    """One ratio-sweep row; statistics cover the feasible runs only."""

    target_ratio: float
    n_students: int
    n_runs: int
    n_failed: int
    minimum: float
    mean: float
    std: float
    fourth_choice_count: int


def sweep_ratio(
    dataset: Dataset,
    scheme: WeightScheme,
    schedule: Schedule,
    ratios: Sequence[float],
    runs_per_ratio: int,
    base_seed: int,
    *,
    jobs: int = 1,
) -> list[RatioPoint]:
    """Batch-run the solver across a list of target project/student ratios.

    Perturbation randomness comes from ``Random(base_seed)`` consumed in
    ratio order; the batch at ratio index j uses seeds starting at
    ``base_seed + (j + 1) * 10_000``, so the whole sweep is reproducible.
    """
    rng = Random(base_seed)
    points = []
    for j, ratio in enumerate(ratios):
        perturbed = perturb_ratio(dataset, ratio, rng)
        stats, results = batch_run(
            perturbed,
            scheme,
            schedule,
            runs_per_ratio,
            base_seed + (j + 1) * 10_000,
            jobs=jobs,
        )
        fourth = 0
        if perturbed.n_choices >= 4:
            fourth = sum(r.histogram.counts[3] for r in results)
        points.append(
            RatioPoint(
                target_ratio=ratio,
                n_students=perturbed.n_students,
                n_runs=stats.n_runs,
                n_failed=stats.n_failed,
                minimum=stats.minimum,
                mean=stats.mean,
                std=stats.std,
                fourth_choice_count=fourth,
            )
        )
    return points


def sweep_csv(points: Sequence[RatioPoint]) -> str:
    buffer = _io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(
        ["ratio", "students", "runs", "failed", "min", "mean", "std", "fourth_choices"]
    )
    for p in points:
        writer.writerow(
            [
                repr(p.target_ratio),
                p.n_students,
                p.n_runs,
                p.n_failed,
                repr(p.minimum),
                repr(p.mean),
                repr(p.std),
                p.fourth_choice_count,
            ]
        )
    return buffer.getvalue()


# ---------------------------------------------------------------------------
# Synthetic instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorConfig:
    """Shape and randomness of a synthetic instance.

    ``skew`` is the popularity exponent: project j is drawn with weight
    proportional to ``(j + 1) ** -skew``, so 0 means uniform choices and
    larger values concentrate demand on low-numbered projects.
    ``workload_fractions`` is the pool each project's supervisor fraction
    is drawn from.
    """

    n_students: int
    n_projects: int
    n_supervisors: int
    n_choices: int = 4
    skew: float = 0.0
    workload_fractions: tuple[float, ...] = (0.5,)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_students < 1:
            raise ValueError("need at least one student")
        if self.n_projects < self.n_choices:
            raise ValueError(
                f"{self.n_projects} projects cannot support {self.n_choices} "
                "distinct choices per student"
            )
        if self.n_supervisors < 1:
            raise ValueError("need at least one supervisor")
        if not all(0.0 < f <= 1.0 for f in self.workload_fractions):
            raise ValueError(f"fractions must lie in (0, 1]: {self.workload_fractions}")


def _weighted_distinct(rng: Random, weights: list[float], k: int) -> list[int]:
    """Draw k distinct indices, each proportional to its remaining weight."""
    remaining = list(enumerate(weights))
    picks = []
    for _ in range(k):
        total = sum(w for _, w in remaining)
        x = rng.random() * total
        acc = 0.0
        chosen = len(remaining) - 1
        for pos, (_, w) in enumerate(remaining):
            acc += w
            if x < acc:
                chosen = pos
                break
        picks.append(remaining.pop(chosen)[0])
    return picks


def generate_dataset(config: GeneratorConfig) -> Dataset:
    """Generate a validated synthetic instance.

    Students draw their choice lists first (in student order), then each
    project's workload fraction is drawn, so one seed fixes the instance
    completely. Projects are dealt to supervisors round-robin.
    """
    rng = Random(config.seed)
    popularity = [(j + 1) ** -config.skew for j in range(config.n_projects)]
    choices = tuple(
        tuple(_weighted_distinct(rng, popularity, config.n_choices))
        for _ in range(config.n_students)
    )
    fractions = config.workload_fractions
    workload = {}
    for project in range(config.n_projects):
        fraction = fractions[int(rng.random() * len(fractions))]
        workload[(project, project % config.n_supervisors)] = fraction
    return validate_dataset(
        Dataset(
            choices=choices,
            n_projects=config.n_projects,
            n_supervisors=config.n_supervisors,
            workload=workload,
            n_choices=config.n_choices,
        )
    )
