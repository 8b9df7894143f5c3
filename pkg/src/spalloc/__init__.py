"""Simulated-annealing solver for the one-sided student-project allocation
problem: every student receives one project from their ranked choices,
subject to project uniqueness and supervisor workload caps."""

from .annealer import (
    MoveCounters,
    MoveKind,
    MoveOutcome,
    MoveState,
    RunResult,
    Schedule,
    anneal,
    propose_and_decide,
    repair_initialize,
)
from .experiments import (
    BatchStats,
    GeneratorConfig,
    batch_run,
    generate_dataset,
    perturb_ratio,
    profile_report,
    sweep_ratio,
    truncate_choices,
)
from .model import (
    LINEAR,
    OPINION,
    Allocation,
    AllocationHistogram,
    Dataset,
    Violation,
    ViolationKind,
    WeightScheme,
    histogram_of,
    is_feasible,
    validate_dataset,
)
from .objective import Energy, delta_energy, energy_normalized, energy_raw
from .oracle import OracleResult, enumerate_feasible, exact_minimum

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "AllocationHistogram",
    "BatchStats",
    "Dataset",
    "Energy",
    "GeneratorConfig",
    "LINEAR",
    "MoveCounters",
    "MoveKind",
    "MoveOutcome",
    "MoveState",
    "OPINION",
    "OracleResult",
    "RunResult",
    "Schedule",
    "Violation",
    "ViolationKind",
    "WeightScheme",
    "anneal",
    "batch_run",
    "delta_energy",
    "energy_normalized",
    "energy_raw",
    "enumerate_feasible",
    "exact_minimum",
    "generate_dataset",
    "histogram_of",
    "is_feasible",
    "perturb_ratio",
    "profile_report",
    "propose_and_decide",
    "repair_initialize",
    "sweep_ratio",
    "truncate_choices",
    "validate_dataset",
]
