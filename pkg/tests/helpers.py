"""Hand-built instances with known structure, shared across test modules."""

from spalloc.annealer import Schedule
from spalloc.model import Dataset, validate_dataset

# Short schedule for tests: same 5 -> 0 sweep, coarser steps and smaller
# per-temperature budgets. Plenty for the tiny instances used in tests.
FAST_SCHEDULE = Schedule(
    t_start=5.0,
    t_end=0.0,
    t_step=0.05,
    attempted_budget_factor=150,
    success_budget_factor=15,
    hard_cap_factor=500,
)


def build_dataset(choices, workload, n_projects, n_supervisors, n_choices=4, **labels):
    return validate_dataset(
        Dataset(
            choices=tuple(tuple(c) for c in choices),
            n_projects=n_projects,
            n_supervisors=n_supervisors,
            workload=dict(workload),
            n_choices=n_choices,
            **labels,
        )
    )


def disjoint_dataset(n_students: int, n_choices: int = 4) -> Dataset:
    """Every student ranks their own private projects; zero contention."""
    m = n_students * n_choices
    choices = [
        tuple(range(i * n_choices, (i + 1) * n_choices)) for i in range(n_students)
    ]
    workload = {(p, p): 0.5 for p in range(m)}
    return build_dataset(choices, workload, m, m, n_choices)


def pigeonhole_dataset() -> Dataset:
    """Two students whose only choice is the same project; no feasible allocation."""
    choices = [(0,), (0,)]
    workload = {(0, 0): 0.5}
    return build_dataset(choices, workload, 1, 1, n_choices=1)


def truncation_trap_dataset() -> Dataset:
    """Four students over the same four projects; feasible only because one
    student can fall back to their fourth choice. Dropping rank 4 leaves
    four students sharing three projects."""
    choices = [
        (0, 1, 2, 3),
        (1, 2, 0, 3),
        (2, 0, 1, 3),
        (0, 2, 1, 3),
    ]
    workload = {(p, p): 0.5 for p in range(4)}
    return build_dataset(choices, workload, 4, 4)


def degenerate_dataset() -> Dataset:
    """Two students, eight projects, supervisors arranged so the linear-weight
    optima are exactly the rank pairs (1,4), (2,3), (3,2) and (4,1), all at
    raw energy -5. Two distinct histograms appear among them, and the
    non-linear opinion weights prefer the (2,3)/(3,2) pair, shrinking the
    optimal set from four allocations to two."""
    choices = [
        (0, 1, 2, 3),
        (4, 5, 6, 7),
    ]
    workload = {
        (0, 0): 1.0,
        (4, 0): 1.0,
        (5, 0): 1.0,
        (6, 0): 1.0,
        (1, 1): 1.0,
        (4, 1): 1.0,
        (5, 1): 1.0,
        (2, 2): 1.0,
        (4, 2): 1.0,
        (3, 3): 0.5,
        (7, 3): 0.5,
    }
    return build_dataset(choices, workload, 8, 4)
