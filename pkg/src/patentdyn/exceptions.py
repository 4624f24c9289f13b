"""Exception hierarchy shared by all patentdyn modules."""

from __future__ import annotations


class PatentDynError(Exception):
    """Base class for every error raised by this package."""


class SchemaError(PatentDynError, ValueError):
    """Input file columns do not match the documented schema."""


class MalformedRow(PatentDynError, ValueError):
    """A single row could not be parsed.

    Parameters
    ----------
    row : int
        1-based data row number (header excluded).
    reason : str
        Human readable description of the problem.
    """

    def __init__(self, row: int, reason: str):
        self.row = row
        self.reason = reason
        super().__init__(f"row {row}: {reason}")


class DuplicatePatentId(PatentDynError, ValueError):
    def __init__(self, patent_id: str, row: int):
        self.patent_id = patent_id
        self.row = row
        super().__init__(f"duplicate patent_id {patent_id!r} at row {row}")


class EmptyAuthority(PatentDynError, ValueError):
    pass


class InvalidWindow(PatentDynError, ValueError):
    pass


class DuplicateEntry(PatentDynError, ValueError):
    pass


class NotARobot(PatentDynError, ValueError):
    pass


class WrongTransform(PatentDynError, ValueError):
    pass


class NegativeValue(PatentDynError, ValueError):
    pass


class TooShort(PatentDynError, ValueError):
    pass


class YearMismatch(PatentDynError, ValueError):
    pass


class RankDeficient(PatentDynError, ValueError):
    pass


class DegenerateSeries(PatentDynError, ValueError):
    pass


class UnsupportedCombination(PatentDynError, ValueError):
    pass


class NoIntegrationOrder(PatentDynError, ValueError):
    pass


class ConvergenceError(PatentDynError, RuntimeError):
    """Optimizer stopped without converging.

    The best parameter vector seen so far is kept on ``best`` so callers can
    inspect or reuse it.
    """

    def __init__(self, message: str, best=None):
        self.best = best
        super().__init__(message)


class InvalidSpec(PatentDynError, ValueError):
    pass


class AllCellsFailed(PatentDynError, RuntimeError):
    pass


class ReplicationError(PatentDynError, RuntimeError):
    """A Monte Carlo replication failed; ``index`` and ``seed`` identify it."""

    def __init__(self, index: int, seed: int, cause: BaseException):
        self.index = index
        self.seed = seed
        self.cause = cause
        super().__init__(f"replication {index} (seed {seed}) failed: {type(cause).__name__}: {cause}")
