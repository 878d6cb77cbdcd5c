"""Exception hierarchy.

Each error carries the CLI exit code that should be used when it escapes a
subcommand: 2 for invalid input, 3 for numerical failure, 4 for an analysis
precondition that the data does not meet.
"""


class LaglensError(Exception):
    exit_code = 3


class InvalidInput(LaglensError, ValueError):
    exit_code = 2


# -- numerical failures -------------------------------------------------------

class NonFiniteState(LaglensError):
    """Integration produced a non-finite or runaway (|y| > 1e12) sample."""


class HorizonTooShort(InvalidInput):
    pass


class OutOfRange(LaglensError, ValueError):
    pass


class BranchEscape(LaglensError):
    pass


class NoConvergence(LaglensError):
    pass


class DomainError(LaglensError, ValueError):
    pass


class NegativeTime(InvalidInput):
    pass


class DegenerateTime(InvalidInput):
    pass


# -- analysis preconditions ---------------------------------------------------

class AnalysisError(LaglensError):
    exit_code = 4


class NoPeaks(AnalysisError):
    pass


class DegenerateAnchor(AnalysisError):
    pass


class RowOutOfRange(AnalysisError):
    pass


class NotLocalized(AnalysisError):
    pass
