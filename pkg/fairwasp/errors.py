"""Exception hierarchy shared across the package."""
from typing import Optional


class FairwaspError(Exception):
    """Base class for all FairWASP errors."""
    pass


class ConfigurationError(FairwaspError):
    """Bad flags, missing columns or invalid settings."""
    pass


class DataError(FairwaspError):
    """Input data that cannot be used as a dataset."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column '{column}'")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class UsageError(FairwaspError, ValueError):
    """Arguments that violate an operation's preconditions."""
    pass


class DomainError(FairwaspError, ValueError):
    """Numeric argument outside the function's domain."""
    pass


class EvaluationError(FairwaspError):
    """A quantity is undefined for the given weights."""
    pass
