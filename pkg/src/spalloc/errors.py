"""Exception hierarchy for the package.

The CLI maps these onto exit codes: InputError -> 2, InfeasibleError -> 3,
anything else -> 4. Raise sites put the offending row/column or entity id
in the message, so nothing structured is carried here.
"""


class SpallocError(Exception):
    """Base class for every error raised by this package."""


class InputError(SpallocError):
    """Malformed or inconsistent input data (CSV files or dataset fields)."""


class MalformedCell(InputError):
    """A CSV cell that is neither blank nor a value of the expected kind."""


class DuplicateRank(InputError):
    """The same rank appears twice in one student column."""


class NonContiguousRanks(InputError):
    """A student's ranks do not form a contiguous run starting at 1."""


class EmptyColumn(InputError):
    """A student column contains no choices at all."""


class RowCountMismatch(InputError):
    """Preferences and supervisor files disagree on the number of projects."""


class WorkloadOutOfRange(InputError):
    """A workload fraction lies outside [0, 1]."""


class DuplicateChoice(InputError):
    """A student lists the same project more than once."""


class UnknownProject(InputError):
    """A choice refers to a project id outside the dataset."""


class UnknownSupervisor(InputError):
    """A workload entry refers to a supervisor id outside the dataset."""


class OrphanProject(InputError):
    """A project has no supervisor with a positive workload fraction."""


class InfeasibleError(SpallocError):
    """The instance admits no feasible allocation (or none was found)."""


class RepairTimeout(InfeasibleError):
    """The repair walk hit its move cap without reaching zero violations."""


class Infeasible(InfeasibleError):
    """Exhaustive enumeration proved the instance has no feasible allocation."""


class InfeasibleAllocation(SpallocError):
    """An operation that requires a feasible allocation was given one that is not."""


class RankOutOfRange(SpallocError):
    """A rank index exceeds the weight scheme or a student's choice list."""


class EmptyCohort(SpallocError):
    """Normalization requested for zero students."""


class SameRank(SpallocError):
    """A move's target rank equals the student's current rank."""


class InstanceTooLarge(SpallocError):
    """The instance exceeds the exhaustive solver's candidate cap."""
