"""Energy of an allocation, on the raw and normalized scales.

Raw energy is minus the weighted count of received ranks, so better
allocations are lower. The normalized scale rescales so that an allocation
giving every student their first choice scores exactly -100, which makes
cohorts of different sizes comparable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptyCohort, RankOutOfRange, SameRank
from .model import Allocation, AllocationHistogram, Dataset, WeightScheme


def energy_raw(histogram: AllocationHistogram, scheme: WeightScheme) -> float:
    """Raw energy: minus the sum of rank weights over all students."""
    if len(histogram.counts) > len(scheme):
        raise RankOutOfRange(
            f"histogram has {len(histogram.counts)} ranks but the scheme "
            f"only weights {len(scheme)}"
        )
    return -sum(w * n for w, n in zip(scheme.weights, histogram.counts))


def energy_normalized(
    histogram: AllocationHistogram, scheme: WeightScheme, n_students: int
) -> float:
    """Energy rescaled so the all-first-choices allocation scores exactly -100.

    Each rank weight is divided by the first-choice weight before summing,
    which keeps the -100 bound exact for every cohort size and scheme.
    """
    if n_students <= 0:
        raise EmptyCohort("normalization requires at least one student")
    if len(histogram.counts) > len(scheme):
        raise RankOutOfRange(
            f"histogram has {len(histogram.counts)} ranks but the scheme "
            f"only weights {len(scheme)}"
        )
    w1 = scheme.weights[0]
    total = sum((w / w1) * n for w, n in zip(scheme.weights, histogram.counts))
    return -100.0 * total / n_students


@dataclass(frozen=True)
class Energy:
    """Raw and normalized energy of one allocation."""

    raw: float
    normalized: float

    @classmethod
    def of(cls, histogram: AllocationHistogram, scheme: WeightScheme) -> "Energy":
        return cls(
            raw=energy_raw(histogram, scheme),
            normalized=energy_normalized(histogram, scheme, histogram.total),
        )


def delta_energy(
    dataset: Dataset,
    allocation: Allocation,
    student: int,
    new_rank: int,
    scheme: WeightScheme,
) -> float:
    """Raw energy change if ``student`` moved to their ``new_rank`` choice.

    Only the moving student's weight changes, so the delta is
    ``weight(old rank) - weight(new rank)`` regardless of the rest of the
    allocation.
    """
    old_rank = dataset.rank_of(student, allocation.assignment[student])
    if old_rank is None:
        raise ValueError(
            f"student {student} currently holds a project outside their choice list"
        )
    if not 1 <= new_rank <= len(dataset.choices[student]):
        raise RankOutOfRange(
            f"student {student} has {len(dataset.choices[student])} choices; "
            f"rank {new_rank} does not exist"
        )
    if new_rank == old_rank:
        raise SameRank(f"student {student} already holds their rank-{new_rank} choice")
    return scheme.weight(old_rank) - scheme.weight(new_rank)
